#include "qkd/approx_diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qkd {

namespace {
constexpr double kWeightFloor = 1e-18;
}

ProjectionBudget projection_budget(const Mat& rho, int d) {
  const int n = static_cast<int>(rho.rows());
  const int da = std::min(d + 1, n);
  const int db = n - da;
  ProjectionBudget b;
  if (db == 0) {
    b.weight = kWeightFloor;
    b.lambda = 0.0;
    b.eps_proj = 0.0;
    return b;
  }
  Mat A = rho.topLeftCorner(da, da);
  Mat D = rho.bottomRightCorner(db, db);
  Mat B = rho.topRightCorner(da, db);
  b.lambda = op_norm(gen_inverse_sqrt(A) * B * gen_inverse_sqrt(D));
  b.weight = std::max(D.trace().real(), kWeightFloor);
  b.eps_proj = b.lambda * std::sqrt(b.weight);
  return b;
}

ProjectionBudget model_budget(double mu, double q, int d) {
  // Both components of the model state have Poissonian diagonals, so the
  // weight outside the photon<=d block is exactly the Poisson tail; only the
  // rank-one coherent remainder contributes off-diagonal mass, and its
  // whitened cross norm is at most its weight 1-q.
  ProjectionBudget b;
  b.weight = std::max(poisson_tail(mu, d), kWeightFloor);
  b.lambda = 1.0 - q;
  b.eps_proj = b.lambda * std::sqrt(b.weight);
  return b;
}

std::vector<EigenBlock> approx_eigendecomposition(const Mat& rho, int d,
                                                  const ProjectionBudget& budget,
                                                  int n_blocks) {
  const int n = static_cast<int>(rho.rows());
  const int da = std::min(d + 1, n);
  Mat block = rho.topLeftCorner(da, da);
  EigenSystem es = hermitian_eig(block);

  // Descending order.
  std::vector<int> order(da);
  for (int i = 0; i < da; ++i) order[i] = da - 1 - i;

  std::vector<EigenBlock> out;
  for (int k = 0; k < std::min(n_blocks, da); ++k) {
    EigenBlock eb;
    eb.index = k;
    eb.value = es.values(order[k]);
    eb.vector = es.vectors.col(order[k]).real();
    // Gap to the rest of the pinched spectrum: the other block eigenvalues
    // plus the complement block, whose eigenvalues all lie in [0, weight].
    double dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < da; ++j)
      if (j != order[k]) dist = std::min(dist, std::abs(eb.value - es.values(j)));
    dist = std::min(dist, eb.value - budget.weight);
    eb.gap = dist - budget.eps_proj;
    if (eb.gap > 0.0) {
      eb.eps_vec = 2.0 * budget.eps_proj / eb.gap;
      eb.usable = eb.value - budget.eps_proj > 0.0;
    } else {
      eb.eps_vec = std::numeric_limits<double>::infinity();
      eb.usable = false;
    }
    out.push_back(eb);
  }
  return out;
}

std::pair<double, double> weyl_gap(const Mat& a, const Mat& b) {
  EigenSystem ea = hermitian_eig(a);
  EigenSystem eb = hermitian_eig(b);
  double worst = (ea.values - eb.values).cwiseAbs().maxCoeff();
  return {worst, op_norm(a - b)};
}

std::pair<double, double> davis_kahan(const Mat& a, const Mat& b, int i) {
  EigenSystem ea = hermitian_eig(a);
  EigenSystem eb = hermitian_eig(b);
  double overlap = std::abs((ea.vectors.col(i).adjoint() * eb.vectors.col(i))(0, 0));
  overlap = std::min(overlap, 1.0);
  double sin_angle = std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
  double gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < ea.values.size(); ++j)
    if (j != i) gap = std::min(gap, std::abs(ea.values(i) - ea.values(j)));
  double pert = op_norm(a - b);
  double corrected = gap - pert;
  double bound = corrected > 0.0 ? 2.0 * pert / corrected
                                 : std::numeric_limits<double>::infinity();
  return {sin_angle, bound};
}

std::pair<double, double> cross_block_one_norm(const Mat& rho, int d) {
  const int n = static_cast<int>(rho.rows());
  const int da = std::min(d + 1, n);
  const int db = n - da;
  if (db == 0) return {0.0, 0.0};
  Mat B = rho.topRightCorner(da, db);
  ProjectionBudget b = projection_budget(rho, d);
  double trace_a = std::max(0.0, rho.topLeftCorner(da, da).trace().real());
  return {trace_norm(B), b.lambda * std::sqrt(b.weight * trace_a)};
}

}  // namespace qkd
