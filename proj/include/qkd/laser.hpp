#pragma once

// Source model for a laser with imperfect phase randomisation: phase
// distributions, the induced photon-number-basis density operators, the
// interferometric visibility they produce, and the conservative "model state"
// (phase-randomised fraction q plus a fixed-phase coherent remainder) used by
// the bounding pipeline.

#include "qkd/fock.hpp"

#include <functional>

namespace qkd {

// Probability density on the phase circle [0, 2pi).  Optionally carries a
// point mass (`delta_weight` at phase `delta_phase`) on top of the continuous
// part, so the fully/partially phase-randomised mixtures are exact.
struct PhaseDistribution {
  std::function<double(double)> density;  // continuous part, per radian
  double delta_weight = 0.0;
  double delta_phase = 0.0;

  // q * uniform + (1-q) * point mass at phase 0.
  static PhaseDistribution delta_mix(double q);
  // Wrapped normal, mean 0, standard deviation sigma.
  static PhaseDistribution wrapped_normal(double sigma);
  static PhaseDistribution uniform();

  // 2*pi times the infimum of the continuous density: the weight of the
  // uniform component that can be split off.
  double randomised_weight(int grid_points = 4096) const;
  // |E[e^{i phi}]|; for i.i.d. pulse phases this is the first-order
  // interferometric visibility between neighbouring pulses.
  double first_moment_magnitude(int grid_points = 4096) const;
};

double wrapped_normal_density(double phi, double sigma);

// Density operator (cutoff+1 square, photon-number basis) of a coherent state
// of intensity mu whose phase is distributed per `dist`.
Mat laser_state(const PhaseDistribution& dist, double mu, int cutoff,
                int grid_points = 4096);

// Conservative two-component model: q * (Poissonian diagonal) +
// (1-q) * |sqrt(mu)><sqrt(mu)|.
Mat model_state(double mu, double q, int cutoff);

// The q solving V = |c1|^2 for the model state, i.e. the model whose
// single-pulse first moment reproduces an observed visibility V under the
// delta-mix decomposition: q = 1 - sqrt(V).
double q_from_visibility(double visibility);

// Partial phase randomisation as a channel: with probability q apply a
// uniformly random phase shift, with probability (1-q) apply a phase drawn
// from the renormalised remainder of `dist`.  Requires dist to dominate
// q * uniform (randomised_weight >= q).  Applied to a single-mode operator in
// the photon-number basis.
Mat phase_modulator_channel(const Mat& input, const PhaseDistribution& dist,
                            double q, int grid_points = 4096);

// Full phase twirl: kills all off-diagonal photon-number coherences.
Mat dephase_diagonal(const Mat& input);

// The renormalised remainder after extracting a uniform component of weight
// q from `dist`: density (dist - q * uniform) / (1 - q), delta mass scaled by
// 1 / (1 - q).  Modulating the two-component model state by this remainder
// reproduces the laser state of the full distribution.  Requires
// dist.randomised_weight() >= q; returns the uniform distribution at q = 1.
PhaseDistribution residual_distribution(const PhaseDistribution& dist,
                                        double q);

}  // namespace qkd
