#include "qkd/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

// Apparatus mode map without channel loss: 8 x 2, orthonormal columns.
// The X interferometer overlaps the delayed early pulse with the late pulse,
// so the middle minus-port bin sees the amplitude difference.
Mat apparatus_map(double t_x) {
  double z = std::sqrt(1.0 - t_x);
  double x = std::sqrt(t_x) / 2.0;
  Mat m = Mat::Zero(8, 2);
  m(0, 0) = z;   // Z-early
  m(1, 1) = z;   // Z-late
  m(2, 0) = x;   // Xm-outer-early
  m(3, 0) = x;   // Xm-middle (early arm, long path)
  m(3, 1) = -x;  // Xm-middle (late arm, short path)
  m(4, 1) = x;   // Xm-outer-late
  m(5, 0) = x;   // Xp-outer-early
  m(6, 0) = x;   // Xp-middle
  m(6, 1) = x;   // Xp-middle
  m(7, 1) = x;   // Xp-outer-late
  return m;
}

Event event_of_pattern(bool ze, bool zl, bool xm) {
  int clicks = int(ze) + int(zl) + int(xm);
  if (clicks == 0) return Event::NoClick;
  if (clicks > 1) return Event::Multi;
  if (ze) return Event::ZEarly;
  if (zl) return Event::ZLate;
  return Event::XMinus;
}

}  // namespace

double ProtocolParams::eta() const {
  return std::pow(10.0, -atten_db_per_km * distance_km / 10.0);
}

std::vector<double> ProtocolParams::intensities() const {
  std::vector<double> v = {mu_signal};
  v.insert(v.end(), decoys.begin(), decoys.end());
  return v;
}

Eigen::Vector2cd signal_amplitudes(int i, double mu) {
  double a = std::sqrt(mu);
  switch (i) {
    case 0: return {0.0, a};                                    // late
    case 1: return {a, 0.0};                                    // early
    case 2: return {a / std::sqrt(2.0), a / std::sqrt(2.0)};    // both
    default: throw std::invalid_argument("signal index");
  }
}

Mat preparation_isometry(int i, int cutoff) {
  Eigen::Vector2cd u = signal_amplitudes(i, 1.0);
  Mat mode_map(2, 1);
  mode_map(0, 0) = u(0);
  mode_map(1, 0) = u(1);
  return linear_network_isometry(mode_map, cutoff);
}

BobNetwork bob_network(const ProtocolParams& p) {
  BobNetwork net;
  net.eta = p.eta();
  double r = std::sqrt(net.eta);
  Mat m = Mat::Zero(10, 2);
  m.topLeftCorner(8, 2) = r * apparatus_map(p.t_x);
  m(8, 0) = std::sqrt(1.0 - net.eta);
  m(9, 1) = std::sqrt(1.0 - net.eta);
  net.mode_map = m;
  net.observed_bins = {{0}, {1}, {3}};
  net.z_modes = {0, 1};
  net.xm_outer_modes = {2, 4};
  return net;
}

std::vector<Mat> event_povms(double t_x, int n_max) {
  Mat map = apparatus_map(t_x);
  std::vector<std::vector<int>> bins = {{0}, {1}, {3}};
  auto els = threshold_povm(map, bins, n_max);  // indexed by click bitmask
  int dim = static_cast<int>(els[0].rows());
  std::vector<Mat> out(kNumEvents, Mat::Zero(dim, dim));
  for (int mask = 0; mask < 8; ++mask) {
    Event e = event_of_pattern(mask & 1, mask & 2, mask & 4);
    out[static_cast<int>(e)] += els[mask];
  }
  return out;
}

Mat cross_click_povm(double t_x, int n_max) {
  Mat map = apparatus_map(t_x);
  // Two composite bins: the Z arm, and the outer X-minus bins.
  return threshold_povm_element(map, {{0, 1}, {2, 4}}, {true, true}, n_max);
}

double cross_click_prob_given_n(int n, double t_x) {
  // A cross click needs at least one photon in the Z arm and one in an outer
  // bin, so fewer than two photons can never produce one; returning exactly
  // zero also avoids the cancellation residual of the closed form.
  if (n < 2) return 0.0;
  double t = t_x;
  return 1.0 - std::pow(t, n) - std::pow(1.0 - t / 4.0, n) +
         std::pow(0.75 * t, n);
}

double weight_above_cutoff_bound(double p_cc, int n_max, double t_x) {
  double denom = cross_click_prob_given_n(n_max + 1, t_x);
  if (denom <= 0.0) return 1.0;
  return std::min(1.0, p_cc / denom);
}

Statistics simulate_statistics(const ProtocolParams& p) {
  BobNetwork net = bob_network(p);
  Statistics st;
  st.intensities = p.intensities();
  const int nmu = static_cast<int>(st.intensities.size());
  st.gamma.assign(3, std::vector<std::array<double, kNumEvents>>(
                         nmu, std::array<double, kNumEvents>{}));
  st.cross_click.assign(3, std::vector<double>(nmu, 0.0));
  for (int s = 0; s < 3; ++s) {
    for (int m = 0; m < nmu; ++m) {
      Eigen::Vector2cd in = signal_amplitudes(s, st.intensities[m]);
      Vec out = net.mode_map * in;
      auto bin_intensity = [&](const std::vector<int>& modes) {
        double l = 0.0;
        for (int mm : modes) l += std::norm(out(mm));
        return l;
      };
      // Threshold detectors on a coherent input: bins click independently
      // with probability 1 - exp(-intensity).
      double pz[3];
      for (int b = 0; b < 3; ++b)
        pz[b] = 1.0 - std::exp(-bin_intensity(net.observed_bins[b]));
      for (int mask = 0; mask < 8; ++mask) {
        double prob = 1.0;
        for (int b = 0; b < 3; ++b)
          prob *= (mask >> b) & 1 ? pz[b] : 1.0 - pz[b];
        Event e = event_of_pattern(mask & 1, mask & 2, mask & 4);
        st.gamma[s][m][static_cast<int>(e)] += prob;
      }
      double p_any_z = 1.0 - std::exp(-bin_intensity(net.z_modes));
      double p_any_outer = 1.0 - std::exp(-bin_intensity(net.xm_outer_modes));
      st.cross_click[s][m] = p_any_z * p_any_outer;
    }
  }
  return st;
}

std::vector<Mat> two_mode_loss_kraus(double eta, const ModeSpace& space) {
  if (space.n_modes != 2 || space.per_mode)
    throw std::invalid_argument("two_mode_loss_kraus: 2-mode total-cutoff space");
  const int c = space.cutoff;
  std::vector<Mat> kraus;
  for (int k1 = 0; k1 <= c; ++k1) {
    for (int k2 = 0; k2 + k1 <= c; ++k2) {
      Mat e = Mat::Zero(space.dim(), space.dim());
      bool nonzero = false;
      for (int i = 0; i < space.dim(); ++i) {
        int m1 = space.basis[i][0], m2 = space.basis[i][1];
        if (k1 > m1 || k2 > m2) continue;
        double amp =
            std::sqrt(binomial(m1, k1) * std::pow(eta, m1 - k1) *
                      std::pow(1.0 - eta, k1) * binomial(m2, k2) *
                      std::pow(eta, m2 - k2) * std::pow(1.0 - eta, k2));
        if (amp == 0.0) continue;
        e(space.index.at({m1 - k1, m2 - k2}), i) = amp;
        nonzero = true;
      }
      if (nonzero) kraus.push_back(e);
    }
  }
  return kraus;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace qkd
