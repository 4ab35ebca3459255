#include "qkd/fock.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

void enumerate(int n_modes, int remaining, int per_mode_cap,
               std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n_modes) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  int cap = per_mode_cap < 0 ? remaining : std::min(per_mode_cap, remaining);
  for (int k = 0; k <= cap; ++k) {
    cur.push_back(k);
    enumerate(n_modes, remaining - k, per_mode_cap, cur, out);
    cur.pop_back();
  }
}

ModeSpace build(int n_modes, bool per_mode, int cutoff) {
  ModeSpace s;
  s.n_modes = n_modes;
  s.per_mode = per_mode;
  s.cutoff = cutoff;
  int max_total = per_mode ? n_modes * cutoff : cutoff;
  for (int total = 0; total <= max_total; ++total) {
    std::vector<int> cur;
    enumerate(n_modes, total, per_mode ? cutoff : -1, cur, s.basis);
  }
  for (int i = 0; i < static_cast<int>(s.basis.size()); ++i)
    s.index[s.basis[i]] = i;
  return s;
}

}  // namespace

ModeSpace ModeSpace::total_cutoff(int n_modes, int max_total) {
  return build(n_modes, false, max_total);
}

ModeSpace ModeSpace::per_mode_cutoff(int n_modes, int max_per_mode) {
  return build(n_modes, true, max_per_mode);
}

int ModeSpace::total_photons(int i) const {
  int t = 0;
  for (int k : basis[i]) t += k;
  return t;
}

int ModeSpace::block_dim(int n) const {
  int d = 0;
  for (int i = 0; i < dim(); ++i)
    if (total_photons(i) <= n) ++d;
  return d;
}

Vec coherent_ket(cplx alpha, int cutoff) {
  Vec v(cutoff + 1);
  double norm2 = std::norm(alpha);
  cplx amp = std::exp(-0.5 * norm2);
  for (int n = 0; n <= cutoff; ++n) {
    v(n) = amp;
    amp *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return v;
}

double poisson_pmf(double mu, int n) {
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

double poisson_tail(double mu, int cutoff) {
  double head = 0.0;
  for (int n = 0; n <= cutoff; ++n) head += poisson_pmf(mu, n);
  return std::max(0.0, 1.0 - head);
}

Mat total_photon_projector(const ModeSpace& space, int n) {
  Mat p = Mat::Zero(space.dim(), space.dim());
  for (int i = 0; i < space.dim(); ++i)
    if (space.total_photons(i) <= n) p(i, i) = 1.0;
  return p;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat partial_trace_b(const Mat& m, int da, int db) {
  Mat out = Mat::Zero(da, da);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < db; ++k) out(i, j) += m(i * db + k, j * db + k);
  return out;
}

Mat partial_trace_a(const Mat& m, int da, int db) {
  Mat out = Mat::Zero(db, db);
  for (int i = 0; i < db; ++i)
    for (int j = 0; j < db; ++j)
      for (int k = 0; k < da; ++k) out(i, j) += m(k * db + i, k * db + j);
  return out;
}

Mat partial_trace_modes(const Mat& m, const ModeSpace& space,
                        const std::vector<int>& keep, ModeSpace* out_space) {
  if (space.per_mode)
    throw std::invalid_argument("partial_trace_modes: total-cutoff spaces only");
  std::vector<int> drop;
  std::vector<bool> kept(space.n_modes, false);
  for (int k : keep) kept[k] = true;
  for (int i = 0; i < space.n_modes; ++i)
    if (!kept[i]) drop.push_back(i);

  ModeSpace out = ModeSpace::total_cutoff(static_cast<int>(keep.size()),
                                          space.cutoff);
  // Group basis indices by the occupation of the traced-out modes.
  std::map<std::vector<int>, std::vector<int>> groups;
  std::vector<int> keep_idx_of(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    std::vector<int> env, sys;
    for (int d : drop) env.push_back(space.basis[i][d]);
    for (int k : keep) sys.push_back(space.basis[i][k]);
    groups[env].push_back(i);
    keep_idx_of[i] = out.index.at(sys);
  }
  Mat r = Mat::Zero(out.dim(), out.dim());
  for (const auto& [env, idxs] : groups)
    for (int a : idxs)
      for (int b : idxs) r(keep_idx_of[a], keep_idx_of[b]) += m(a, b);
  if (out_space) *out_space = out;
  return r;
}

Mat linear_network_isometry(const Mat& mode_map, int n_max) {
  const int n_out = static_cast<int>(mode_map.rows());
  const int n_in = static_cast<int>(mode_map.cols());
  ModeSpace in = ModeSpace::total_cutoff(n_in, n_max);
  ModeSpace out = ModeSpace::total_cutoff(n_out, n_max);
  Mat v = Mat::Zero(out.dim(), in.dim());
  for (int col = 0; col < in.dim(); ++col) {
    // |n_1..n_k> = prod_i (a_i^dag)^{n_i} / sqrt(n_i!) |vac>, with each
    // a_i^dag mapped through the network to sum_j mode_map(j,i) b_j^dag.
    std::map<std::vector<int>, cplx> state;
    state[std::vector<int>(n_out, 0)] = 1.0;
    double norm_fac = 1.0;
    for (int i = 0; i < n_in; ++i) {
      int ni = in.basis[col][i];
      for (int rep = 0; rep < ni; ++rep) {
        std::map<std::vector<int>, cplx> next;
        for (const auto& [occ, amp] : state) {
          for (int j = 0; j < n_out; ++j) {
            if (mode_map(j, i) == 0.0) continue;
            std::vector<int> o2 = occ;
            o2[j] += 1;
            next[o2] += amp * mode_map(j, i) * std::sqrt(double(o2[j]));
          }
        }
        state.swap(next);
      }
      norm_fac *= std::sqrt(std::tgamma(ni + 1.0));
    }
    for (const auto& [occ, amp] : state)
      v(out.index.at(occ), col) = amp / norm_fac;
  }
  return v;
}

Mat threshold_povm_element(const Mat& mode_map,
                           const std::vector<std::vector<int>>& bins,
                           const std::vector<bool>& pattern, int n_max) {
  const int n_out = static_cast<int>(mode_map.rows());
  Mat v = linear_network_isometry(mode_map, n_max);
  ModeSpace out = ModeSpace::total_cutoff(n_out, n_max);
  RVec d(out.dim());
  for (int i = 0; i < out.dim(); ++i) {
    bool ok = true;
    for (size_t b = 0; b < bins.size() && ok; ++b) {
      int photons = 0;
      for (int m : bins[b]) photons += out.basis[i][m];
      ok = (photons >= 1) == pattern[b];
    }
    d(i) = ok ? 1.0 : 0.0;
  }
  return v.adjoint() * d.asDiagonal() * v;
}

std::vector<Mat> threshold_povm(const Mat& mode_map,
                                const std::vector<std::vector<int>>& bins,
                                int n_max) {
  std::vector<Mat> els;
  const size_t nb = bins.size();
  for (size_t mask = 0; mask < (size_t{1} << nb); ++mask) {
    std::vector<bool> pattern(nb);
    for (size_t b = 0; b < nb; ++b) pattern[b] = (mask >> b) & 1;
    els.push_back(threshold_povm_element(mode_map, bins, pattern, n_max));
  }
  return els;
}

EigenSystem hermitian_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
  return {es.eigenvalues(), es.eigenvectors()};
}

double op_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double trace_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

Mat gen_inverse_sqrt(const Mat& m, double tol) {
  EigenSystem es = hermitian_eig(m);
  RVec d(es.values.size());
  for (int i = 0; i < d.size(); ++i)
    d(i) = es.values(i) > tol ? 1.0 / std::sqrt(es.values(i)) : 0.0;
  return es.vectors * d.asDiagonal() * es.vectors.adjoint();
}

Mat psd_sqrt(const Mat& m) {
  EigenSystem es = hermitian_eig(m);
  RVec d(es.values.size());
  for (int i = 0; i < d.size(); ++i)
    d(i) = es.values(i) > 0 ? std::sqrt(es.values(i)) : 0.0;
  return es.vectors * d.asDiagonal() * es.vectors.adjoint();
}

Mat psd_clip(const Mat& m) {
  EigenSystem es = hermitian_eig(m);
  RVec d = es.values.cwiseMax(0.0);
  return es.vectors * d.asDiagonal() * es.vectors.adjoint();
}

Mat herm_log(const Mat& m) {
  EigenSystem es = hermitian_eig(m);
  RVec d(es.values.size());
  for (int i = 0; i < d.size(); ++i) d(i) = std::log(es.values(i));
  return es.vectors * d.asDiagonal() * es.vectors.adjoint();
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                             std::lgamma(n - k + 1.0)));
}

}  // namespace qkd
