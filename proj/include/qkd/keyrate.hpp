#pragma once

// Key-rate lower bounds: conditional-entropy objective (relative entropy to
// the pinched state after the key map), exact gradient, Frank-Wolfe descent
// over the decoy-constrained block feasible set, and assembly of the total
// rate from per-eigenvector blocks.

#include "qkd/approx_diag.hpp"
#include "qkd/decoy.hpp"
#include "qkd/optim.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

// f(rho) = D(G(rho) || Z(G(rho))) in bits, with G(rho) = K rho K^dag for the
// single Kraus keeping Alice's key signals and Bob's Z detections, and Z the
// dephasing of the key register.  A fixed mixing regularisation after G keeps
// both logarithms finite; joint convexity makes the regularised value a lower
// bound on the exact one.
struct ObjectiveMap {
  Mat kraus;        // dim_out x dim_in
  int dim_in = 0;   // 3 * received-block dim
  int dim_out = 0;  // 2 * dim_in (key register in front)
  double eps = 1e-10;

  Mat apply(const Mat& rho) const;    // G
  Mat pinch(const Mat& sigma) const;  // Z (key register dephasing)
};

// Build the key map for the three-state protocol: key bit = Alice signal in
// {0,1}, kept when Bob sees a Z-bin detection.
ObjectiveMap build_objective_map(double t_x, int n_max);

double objective_value(const ObjectiveMap& map, const Mat& rho);
Mat objective_gradient(const ObjectiveMap& map, const Mat& rho);

// Alice-side Gram matrix of one source eigenvector: entries
// sqrt(p_i p_j) <v|V_i^dag V_j|v>.
Mat alice_gram(const RVec& v, const std::array<double, 3>& priors);

// Feasible set and solve for one source eigenvector block.
struct BlockProblem {
  RMat yield_lo, yield_hi;  // signals x events, already eps_vec-widened
  Mat rho_a;                // 3 x 3 Gram of the block eigenvector
  double eps_vec = 0.0;
  double trace_lo = 0.0;    // 1 - (weight above the received block) - eps_vec
  std::array<double, 3> priors = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  double t_x = 0.1;
  int n_max = 2;
};

struct BlockResult {
  double entropy_bound = 0.0;  // certified lower bound on min f (bits)
  double upper_value = 0.0;    // f at the best feasible iterate
  int iterations = 0;
  double gap = 0.0;            // (upper - lower) / max(1, |upper|)
  bool feasible = true;
};

struct FrankWolfeOptions {
  int max_iterations = 150;
  double rel_tol = 1e-7;
  bool verbose = false;
};

BlockResult solve_block(const BlockProblem& bp, const ObjectiveMap& map,
                        SolverSession& session,
                        const FrankWolfeOptions& opts = {});

// Error-correction leakage per pulse: f_EC * p(keep) * H(Alice bit | Bob Z
// outcome), from the honest signal-intensity statistics.
double delta_leak(const ProtocolParams& p, const Statistics& st, double f_ec);

struct BlockReport {
  int block = 0;
  double weight = 0.0;        // certified eigenvalue floor p' - eps_proj
  double eps_vec = 0.0;
  double entropy_bound = 0.0;
  double contribution = 0.0;  // weight * entropy bound
  bool usable = false;
};

struct KeyRatePoint {
  double distance_km = 0.0;
  double q = 1.0;
  double rate = 0.0;      // max(0, sum of contributions - delta_leak)
  double raw_rate = 0.0;  // before clamping
  double leak = 0.0;
  std::vector<BlockReport> blocks;
  double eps_proj = 0.0;      // source-truncation eigenvalue budget
  std::vector<double> intensities;  // distinct intensities, signal first
  std::vector<double> w_n;    // received weight beyond the cutoff, per intensity
  bool solver_clean = true;   // every SDP reached a certified optimum
  double max_sdp_gap = 0.0;   // worst relative duality gap over all solves
  long sdp_count = 0;         // number of certified solves behind this point
};

struct KeyRateOptions {
  int d = 10;        // source block photon cutoff
  int n_max = 2;     // received block total-photon cutoff
  int n_blocks = 3;  // retained eigenvector blocks
  double f_ec = 1.0;
  // Block indices whose conditional entropy is bounded by the full SDP
  // descent; every other block keeps the trivial (and still valid) zero
  // bound.  The vacuum block is always zero and the two-photon block's
  // entropy is numerically negligible, so by default only the single-photon
  // block pays for solver time.
  std::vector<int> entropy_blocks = {1};
  FrankWolfeOptions fw;
};

KeyRatePoint total_keyrate(const ProtocolParams& p, double q,
                           const KeyRateOptions& opts, SolverSession& session);

}  // namespace qkd
