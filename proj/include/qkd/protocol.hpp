#pragma once

// Three-state time-bin protocol: Alice's preparations (early / late / both),
// Bob's passive Z/X measurement network with threshold detectors, honest
// channel statistics, and the cross-click bound on the received photon-number
// weight above a cutoff.

#include "qkd/fock.hpp"

#include <array>
#include <vector>

namespace qkd {

struct ProtocolParams {
  double mu_signal = 0.5;
  std::vector<double> decoys = {0.0, 0.5};  // decoy intensities (mu_signal is
                                            // used for key rounds only)
  std::array<double, 3> priors = {1.0 / 3, 1.0 / 3, 1.0 / 3};  // 0, 1, +
  double distance_km = 0.0;
  double atten_db_per_km = 0.16;
  double t_x = 0.1;  // fraction routed to the monitoring (X) interferometer

  double eta() const;                       // channel transmittance
  std::vector<double> intensities() const;  // mu_signal then decoys
};

// Events resolved from the observed detector bins (Z-early, Z-late, X-minus
// middle): vacuum, one of the three single clicks, or any multi-click.
enum class Event { NoClick = 0, ZEarly = 1, ZLate = 2, XMinus = 3, Multi = 4 };
constexpr int kNumEvents = 5;

// Flying-mode amplitudes (early, late) of signal i in {0: late pulse,
// 1: early pulse, 2: both pulses} at intensity mu; |amp|^2 sums to mu.
Eigen::Vector2cd signal_amplitudes(int i, double mu);

// Isometry from the single-mode photon-number space (photon <= cutoff) into
// the two temporal modes (total <= cutoff) realising signal i's pulse shape.
Mat preparation_isometry(int i, int cutoff);

// Bob's apparatus as a passive network.  Ten output modes:
// 0 Z-early, 1 Z-late, 2 Xm-outer-early, 3 Xm-middle, 4 Xm-outer-late,
// 5 Xp-outer-early, 6 Xp-middle, 7 Xp-outer-late, 8/9 channel loss.
// Columns are the two input temporal modes; includes channel transmittance
// eta (loss modes keep the columns orthonormal).
struct BobNetwork {
  Mat mode_map;  // 10 x 2
  std::vector<std::vector<int>> observed_bins;  // Z-early, Z-late, Xm-middle
  std::vector<int> z_modes;        // modes of the Z arm
  std::vector<int> xm_outer_modes; // non-interfering minus-port bins
  double eta = 1.0;
};
BobNetwork bob_network(const ProtocolParams& p);

// Five event POVM elements on the two received temporal modes (total photon
// <= n_max), eta-free (the apparatus only; channel loss belongs to the
// untrusted channel).  Indexed by Event.
std::vector<Mat> event_povms(double t_x, int n_max);

// POVM element of the cross-click observable (>=1 click in the Z arm AND >=1
// click in an outer X-minus bin) on the two received modes, total <= n_max.
Mat cross_click_povm(double t_x, int n_max);

// Probability of a cross click given n photons arrive at the apparatus
// (independent of how they are distributed over the two temporal modes):
// 1 - t^n - (1 - t/4)^n + (3t/4)^n.
double cross_click_prob_given_n(int n, double t_x);

// Upper bound on the probability weight of more than n_max photons arriving,
// from an observed cross-click probability: p_cc / p(cc | n_max + 1 photons).
double weight_above_cutoff_bound(double p_cc, int n_max, double t_x);

// Honest-channel statistics.  gamma[s][m][e]: probability of event e when
// signal s is sent at intensity index m; cross_click[s][m] likewise.
// Phase randomisation does not affect these (all observables are diagonal in
// total photon number at fixed pulse shape), so coherent inputs suffice.
struct Statistics {
  std::vector<double> intensities;
  std::vector<std::vector<std::array<double, kNumEvents>>> gamma;
  std::vector<std::vector<double>> cross_click;
};
Statistics simulate_statistics(const ProtocolParams& p);

// Kraus operators of the two-mode pure-loss channel (transmittance eta) on a
// total-photon-cutoff space; trace preserving on the truncated space because
// loss never raises photon number.
std::vector<Mat> two_mode_loss_kraus(double eta, const ModeSpace& space);

// Binary entropy (bits), 0*log0 = 0.
double binary_entropy(double p);

}  // namespace qkd
