#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qkd/protocol.hpp"

using namespace qkd;

namespace {

// Brute-force cross-click probability: each of the n photons independently
// lands in the Z arm (prob 1-t), an outer minus bin (t/4), or anywhere else
// (3t/4); enumerate all 3^n routings and add up those with at least one Z
// and at least one outer hit.
double cross_click_brute(int n, double t) {
  double probs[3] = {1.0 - t, t / 4.0, 3.0 * t / 4.0};
  double total = 0.0;
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  for (int mask = 0; mask < combos; ++mask) {
    int m = mask;
    bool z = false, outer = false;
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      int c = m % 3;
      m /= 3;
      p *= probs[c];
      z = z || (c == 0);
      outer = outer || (c == 1);
    }
    if (z && outer) total += p;
  }
  return total;
}

}  // namespace

TEST_CASE("signal amplitudes carry the full intensity") {
  for (int i = 0; i < 3; ++i) {
    auto a = signal_amplitudes(i, 0.5);
    CHECK(a.squaredNorm() == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(std::abs(signal_amplitudes(0, 0.5)(0)) < 1e-15);  // late only
  CHECK(std::abs(signal_amplitudes(1, 0.5)(1)) < 1e-15);  // early only
}

TEST_CASE("preparation isometries are isometries") {
  for (int i = 0; i < 3; ++i) {
    Mat v = preparation_isometry(i, 4);
    CHECK((v.adjoint() * v - Mat::Identity(v.cols(), v.cols())).norm() < 1e-12);
  }
}

TEST_CASE("event POVM is complete and PSD") {
  auto povms = event_povms(0.1, 3);
  REQUIRE(povms.size() == kNumEvents);
  Mat sum = Mat::Zero(povms[0].rows(), povms[0].cols());
  for (const auto& e : povms) {
    sum += e;
    EigenSystem es = hermitian_eig(e);
    CHECK(es.values.minCoeff() > -1e-11);
  }
  CHECK((sum - Mat::Identity(sum.rows(), sum.cols())).norm() < 1e-10);
}

TEST_CASE("cross-click closed form matches brute-force enumeration") {
  for (int n = 0; n <= 6; ++n)
    for (int ti = 1; ti <= 9; ++ti) {
      double t = 0.1 * ti;
      CHECK(std::abs(cross_click_prob_given_n(n, t) - cross_click_brute(n, t)) <
            1e-12);
    }
}

TEST_CASE("cross-click quantum expectation is independent of the split") {
  // Evaluate the actual POVM element on |m photons early, n-m late>: the
  // closed form must hold for every split m.
  double t = 0.3;
  for (int n = 0; n <= 4; ++n) {
    Mat povm = cross_click_povm(t, n);
    ModeSpace s = ModeSpace::total_cutoff(2, n);
    for (int m = 0; m <= n; ++m) {
      int idx = s.index.at({m, n - m});
      double p = povm(idx, idx).real();
      CHECK(std::abs(p - cross_click_prob_given_n(n, t)) < 1e-11);
    }
  }
}

TEST_CASE("cross-click vanishes below two photons and grows with n") {
  for (double t : {0.1, 0.5, 0.9}) {
    CHECK(cross_click_prob_given_n(0, t) == 0.0);
    CHECK(cross_click_prob_given_n(1, t) == doctest::Approx(0.0).epsilon(1e-15));
    for (int n = 1; n <= 50; ++n)
      CHECK(cross_click_prob_given_n(n, t) >=
            cross_click_prob_given_n(n - 1, t) - 1e-15);
  }
}

TEST_CASE("cutoff weight bound is conservative") {
  double t = 0.1;
  int n_max = 2;
  // Observed cross clicks from >= n_max+1 photons only: the bound must not
  // understate the weight.
  double p3 = cross_click_prob_given_n(3, t);
  CHECK(weight_above_cutoff_bound(p3 * 0.2, n_max, t) >= 0.2 - 1e-12);
  CHECK(weight_above_cutoff_bound(0.0, n_max, t) == doctest::Approx(0.0));
  CHECK(weight_above_cutoff_bound(1.0, n_max, t) == doctest::Approx(1.0));
}

TEST_CASE("honest statistics are normalised and loss-consistent") {
  ProtocolParams p;
  p.distance_km = 50.0;
  Statistics st = simulate_statistics(p);
  for (size_t s = 0; s < 3; ++s)
    for (size_t m = 0; m < st.intensities.size(); ++m) {
      double sum = 0.0;
      for (int e = 0; e < kNumEvents; ++e) {
        CHECK(st.gamma[s][m][e] >= -1e-15);
        sum += st.gamma[s][m][e];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
      if (st.intensities[m] == 0.0) {
        CHECK(st.gamma[s][m][static_cast<int>(Event::NoClick)] ==
              doctest::Approx(1.0).epsilon(1e-12));
      }
    }

  // Loss only rescales the intensity: stats at distance D and intensity mu
  // equal stats at distance 0 and intensity eta * mu.
  ProtocolParams p0;
  p0.distance_km = 0.0;
  p0.mu_signal = p.eta() * p.mu_signal;
  p0.decoys = {0.0, p.eta() * 0.5};
  Statistics st0 = simulate_statistics(p0);
  for (size_t s = 0; s < 3; ++s)
    for (int e = 0; e < kNumEvents; ++e)
      CHECK(st.gamma[s][0][e] ==
            doctest::Approx(st0.gamma[s][0][e]).epsilon(1e-10));
}

TEST_CASE("two-mode loss Kraus operators are trace preserving") {
  ModeSpace s = ModeSpace::total_cutoff(2, 3);
  for (double eta : {0.2, 0.7, 1.0}) {
    auto kraus = two_mode_loss_kraus(eta, s);
    Mat sum = Mat::Zero(s.dim(), s.dim());
    for (const auto& k : kraus) sum += k.adjoint() * k;
    CHECK((sum - Mat::Identity(s.dim(), s.dim())).norm() < 1e-10);
  }
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(binary_entropy(0.11) == doctest::Approx(0.49992).epsilon(1e-4));
}
