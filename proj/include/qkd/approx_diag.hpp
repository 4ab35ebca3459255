#pragma once

// Approximate diagonalisation of nearly-diagonal source states: certified
// budgets for replacing a state by the eigendecomposition of its projection
// onto a finite block, with per-eigenvalue and per-eigenvector error bounds.

#include "qkd/fock.hpp"

namespace qkd {

struct ProjectionBudget {
  double eps_proj = 0.0;  // bound on |perturbed - true| for every eigenvalue
  double lambda = 0.0;    // whitened cross-block norm
  double weight = 0.0;    // weight of the state outside the block
};

// Budget for truncating `rho` (Hermitian PSD, trace <= 1) to its leading d x d
// photon-number block.  lambda is the operator norm of the cross block of rho
// whitened on both sides by generalised inverse square roots of the diagonal
// blocks; weight is Tr[rho] outside the block; eps_proj = lambda * sqrt(weight)
// bounds the trace norm of the off-diagonal part (and hence every eigenvalue
// shift between rho and its block-diagonal pinching).
ProjectionBudget projection_budget(const Mat& rho, int d);

// Closed-form budget for the two-component model state: the Poissonian part
// is block diagonal, the coherent remainder is rank one with whitened cross
// norm at most one, so lambda <= 1-q and weight is the (1-q)-weighted Poisson
// tail; eps_proj = (1-q) * sqrt(tail).  The tail is floored at 1e-18 so the
// budget never degenerates to an exact-zero claim for finite d.
ProjectionBudget model_budget(double mu, double q, int d);

struct EigenBlock {
  int index = 0;          // 0 = largest perturbed eigenvalue
  double value = 0.0;     // perturbed eigenvalue p'_n
  RVec vector;            // eigenvector of the projected block (real)
  double gap = 0.0;       // eps_proj-corrected spectral gap around this value
  double eps_vec = 0.0;   // subspace angle bound: 2*eps_proj / gap
  bool usable = false;    // gap > 0 and value - eps_proj > 0
};

// Eigendecomposition of the leading d x d block of rho, with per-block
// perturbation certificates against the untruncated state.  Blocks are sorted
// by descending eigenvalue; the first n_blocks are returned.
std::vector<EigenBlock> approx_eigendecomposition(const Mat& rho, int d,
                                                  const ProjectionBudget& budget,
                                                  int n_blocks);

// Max |eigenvalue difference| between Hermitian a and b (same dims), and the
// perturbation bound it must respect: op_norm(a-b).  Returns the pair.
std::pair<double, double> weyl_gap(const Mat& a, const Mat& b);

// sin of the angle between the i-th eigenvectors of Hermitian a and b, and
// the Davis-Kahan style bound 2*op_norm(a-b)/gap_i(a) (gap measured in a's
// spectrum, corrected by the perturbation).  Returns {sin_angle, bound};
// bound is +inf when the corrected gap closes.
std::pair<double, double> davis_kahan(const Mat& a, const Mat& b, int i);

// One-norm bound for a cross block: ||B||_1 <= lambda * sqrt(w) where
// B = P rho Q for orthogonal projectors P, Q, lambda the whitened norm and
// w = Tr[Q rho Q].  Returns {trace_norm(B), bound}.
std::pair<double, double> cross_block_one_norm(const Mat& rho, int d);

}  // namespace qkd
