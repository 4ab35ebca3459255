#pragma once

// Truncated multimode Fock-space linear algebra: basis enumeration, coherent
// states, passive linear networks, threshold-detector POVMs, and the spectral
// helpers shared by the bounding machinery.

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <vector>

namespace qkd {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using cplx = std::complex<double>;

// Occupation-number basis for n_modes modes, truncated either by total photon
// number or per-mode photon number.  Basis states are ordered by total photon
// number ascending, lexicographic within each total, so the span of states
// with total <= N is always a leading contiguous block.
struct ModeSpace {
  int n_modes = 1;
  bool per_mode = false;  // false: total-photon cutoff; true: per-mode cutoff
  int cutoff = 0;
  std::vector<std::vector<int>> basis;             // index -> occupation
  std::map<std::vector<int>, int> index;           // occupation -> index

  static ModeSpace total_cutoff(int n_modes, int max_total);
  static ModeSpace per_mode_cutoff(int n_modes, int max_per_mode);

  int dim() const { return static_cast<int>(basis.size()); }
  int total_photons(int i) const;
  // Dimension of the subspace with total photon number <= n (a leading block).
  int block_dim(int n) const;
  bool operator==(const ModeSpace& o) const {
    return n_modes == o.n_modes && per_mode == o.per_mode && cutoff == o.cutoff;
  }
};

// Single-mode coherent state |alpha> truncated at photon number `cutoff`
// (unnormalised truncation of the exact expansion; the missing weight is the
// Poisson tail beyond the cutoff).
Vec coherent_ket(cplx alpha, int cutoff);

// Weight of a mean-mu Poisson distribution strictly above `cutoff`.
double poisson_tail(double mu, int cutoff);

double poisson_pmf(double mu, int n);

// Projector onto total photon number <= n, as a diagonal matrix on `space`.
Mat total_photon_projector(const ModeSpace& space, int n);

// Kronecker product (A on space_a) x (B on space_b); result indexed by the
// product basis in (a,b) lex order.
Mat kron(const Mat& a, const Mat& b);

// Partial trace over subsystem B of an operator on A (x) B with dims (da, db).
Mat partial_trace_b(const Mat& m, int da, int db);
Mat partial_trace_a(const Mat& m, int da, int db);

// Partial trace of an operator on a multimode ModeSpace down to the modes in
// `keep` (total-photon-cutoff spaces; the traced-out modes absorb the rest of
// the photon budget).
Mat partial_trace_modes(const Mat& m, const ModeSpace& space,
                        const std::vector<int>& keep, ModeSpace* out_space);

// Isometry of a passive linear network on the total-photon-<=N sector.
// `mode_map` is (n_out x n_in) with orthonormal columns: the network maps
// input creation operator a_i^dag to sum_j mode_map(j,i) b_j^dag.  Returns the
// matrix from total_cutoff(n_in, N) to total_cutoff(n_out, N); an isometry
// whenever the columns of mode_map are orthonormal.
Mat linear_network_isometry(const Mat& mode_map, int n_max);

// Threshold-detector POVM elements on the network input space.  `bins` groups
// output modes into detectors; output modes not listed in any bin are ignored
// (traced out).  `pattern[b]` = true means detector b clicks (>=1 photon in
// its modes).  Element = V^dag D V with V the network isometry on the <=n_max
// sector and D the diagonal indicator of the click pattern.
Mat threshold_povm_element(const Mat& mode_map,
                           const std::vector<std::vector<int>>& bins,
                           const std::vector<bool>& pattern, int n_max);

// All 2^bins POVM elements, indexed by click-pattern bitmask (bit b = bin b
// clicked).  They sum to the identity on the input sector.
std::vector<Mat> threshold_povm(const Mat& mode_map,
                                const std::vector<std::vector<int>>& bins,
                                int n_max);

// Spectral helpers -----------------------------------------------------------

struct EigenSystem {
  RVec values;  // ascending
  Mat vectors;  // columns
};

EigenSystem hermitian_eig(const Mat& m);

double op_norm(const Mat& m);     // largest singular value
double trace_norm(const Mat& m);  // sum of singular values

// Generalised inverse square root of a Hermitian PSD matrix: eigenvalues
// below `tol` are treated as exact zeros (mapped to 0 instead of 1/sqrt).
Mat gen_inverse_sqrt(const Mat& m, double tol = 1e-12);

// Hermitian PSD square root.
Mat psd_sqrt(const Mat& m);

// Nearest PSD matrix in Frobenius norm (eigenvalue clipping); also
// re-Hermitises the input.
Mat psd_clip(const Mat& m);

// Matrix logarithm (base e) of a Hermitian positive definite matrix.
Mat herm_log(const Mat& m);

double binomial(int n, int k);

}  // namespace qkd
