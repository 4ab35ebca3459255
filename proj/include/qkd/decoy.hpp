#pragma once

// Generalised decoy-state analysis: semidefinite yield bounds that stay valid
// for partially phase-randomised sources, via a Choi-matrix program over a
// finite source block and a finite received-photon-number block, with
// rigorous corrections for both truncations.

#include "qkd/optim.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Everything needed to bound yields for one Alice signal: the source-block
// model states per intensity, the received-side event POVMs on the low
// photon-number block, the observed statistics, and the truncation budgets.
struct DecoyInstance {
  int signal = 0;
  int d = 10;      // source block keeps photon numbers <= d (dim d+1)
  int n_max = 2;   // received block keeps total photons <= n_max
  std::vector<double> intensities;
  std::vector<Mat> states;   // model state per intensity, (d+1) square
  std::vector<Mat> povms;    // event POVMs on the received block (kNumEvents)
  RMat gamma;                // intensities x events observed probabilities
  std::vector<double> w_M;   // source weight beyond the block, per intensity
  std::vector<double> eps_M; // source off-diagonal budget, per intensity
  std::vector<double> W_N;   // received weight beyond n_max, per intensity
  double trace_cap = 11.0;   // implied by Tr_K J <= Pi_M: Tr J <= d+1
};

DecoyInstance make_decoy_instance(const ProtocolParams& p,
                                  const Statistics& st, double q, int signal,
                                  int d, int n_max);

// The shared feasible set: Choi variable J >= 0 on block x received-block,
// Tr_received J <= identity of the source block, and for every (intensity,
// event) a two-sided window around the observed probability widened by the
// truncation budgets.
ConicProblem decoy_feasible_set(const DecoyInstance& inst);

// Certified bounds on Tr[(sigma^T (x) F) J] over the feasible set, for sigma
// a state supported on the source block and F a POVM element supported on the
// received block (0 <= F <= Pi_N).  Results are clamped to [0, 1].
Interval yield_bounds(const DecoyInstance& inst, const Mat& sigma,
                      const Mat& F, SolverSession& session,
                      bool* ok = nullptr);

// Yield bounds for a POVM element with support above the received block:
// only its low block enters the program and the upper bound pays the weight
// above the block.
Interval yield_bounds_general(const DecoyInstance& inst, const Mat& sigma,
                              const Mat& F_low_block, double weight_above,
                              SolverSession& session, bool* ok = nullptr);

// Interval widening for approximate eigenvectors (sigma known only up to a
// subspace angle): both ends move by eps_vec, clamped to [0, 1].
Interval widen(Interval iv, double eps_vec);

// Classical decoy-state linear program (fully phase-randomised source):
// bounds p(event | n = n_target photons) from the observed statistics of one
// signal, using Poisson photon-number statistics truncated at n_lp.
Interval standard_decoy_lp(const std::vector<double>& intensities,
                           const RMat& gamma, int event, int n_target,
                           int n_lp, SolverSession& session);

}  // namespace qkd
