#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "qkd/approx_diag.hpp"
#include "qkd/laser.hpp"

using namespace qkd;

namespace {

Mat random_density(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  Mat rho = m * m.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("fully randomised model state has a zero projection budget") {
  ProjectionBudget b = model_budget(0.5, 1.0, 10);
  CHECK(b.eps_proj == doctest::Approx(0.0));
  auto blocks = approx_eigendecomposition(model_state(0.5, 1.0, 10), 10, b, 3);
  REQUIRE(blocks.size() == 3);
  for (const auto& blk : blocks) {
    CHECK(blk.value ==
          doctest::Approx(poisson_pmf(0.5, blk.index)).epsilon(1e-12));
    CHECK(blk.eps_vec == doctest::Approx(0.0));
    CHECK(blk.usable);
    // Eigenvectors of a diagonal state are photon-number states.
    RVec v = blk.vector;
    CHECK(std::abs(std::abs(v(blk.index)) - 1.0) < 1e-9);
  }
}

TEST_CASE("model budget closed form") {
  double mu = 0.5, q = 0.95;
  int d = 10;
  ProjectionBudget b = model_budget(mu, q, d);
  CHECK(b.lambda == doctest::Approx(1.0 - q).epsilon(1e-12));
  CHECK(b.weight >= (1.0 - q) * poisson_tail(mu, d) - 1e-15);
  CHECK(b.eps_proj == doctest::Approx(b.lambda * std::sqrt(b.weight)));
}

TEST_CASE("certified one-norm bound dominates the cross-block corner") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Mat rho = random_density(8, rng);
    int d = 5;
    auto [value, bound] = cross_block_one_norm(rho, d);
    Mat corner = rho.topRightCorner(d + 1, 8 - d - 1);
    CHECK(value == doctest::Approx(trace_norm(corner)).epsilon(1e-10));
    CHECK(value <= bound + 1e-10);
  }
}

TEST_CASE("eigenvalue perturbation bound holds against a wide oracle") {
  double mu = 0.5, q = 0.9564;
  int d = 12, d_oracle = 30;
  ProjectionBudget b = model_budget(mu, q, d);
  auto blocks = approx_eigendecomposition(model_state(mu, q, d), d, b, 3);
  EigenSystem oracle = hermitian_eig(model_state(mu, q, d_oracle));
  for (const auto& blk : blocks) {
    if (!blk.usable) continue;
    double truth = oracle.values(d_oracle - blk.index);
    CHECK(std::abs(blk.value - truth) <= b.eps_proj + poisson_tail(mu, d));
  }
}

TEST_CASE("Weyl inequality on random pairs") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    Mat a = random_density(8, rng);
    Mat bmat = random_density(8, rng);
    auto [diff, bound] = weyl_gap(a, bmat);
    CHECK(diff <= bound + 1e-12);
  }
}

TEST_CASE("Davis-Kahan style eigenvector bound on random pairs") {
  std::mt19937 rng(9);
  int hits = 0;
  for (int trial = 0; trial < 25; ++trial) {
    Mat a = random_density(8, rng);
    Mat delta = 0.01 * random_density(8, rng);
    Mat bmat = a + delta;
    for (int i = 0; i < 8; ++i) {
      auto [sin_angle, bound] = davis_kahan(a, bmat, i);
      if (!std::isfinite(bound)) continue;
      ++hits;
      CHECK(sin_angle <= bound + 1e-10);
    }
  }
  CHECK(hits > 0);
}

TEST_CASE("cross-block one-norm bound on random PSD instances") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    Mat rho = random_density(8, rng);
    auto [value, bound] = cross_block_one_norm(rho, 5);
    CHECK(value <= bound + 1e-10);
  }
}

TEST_CASE("blocks are sorted and consistent") {
  double mu = 0.5, q = 0.93;
  int d = 10;
  ProjectionBudget b = model_budget(mu, q, d);
  auto blocks = approx_eigendecomposition(model_state(mu, q, d), d, b, 4);
  REQUIRE(blocks.size() == 4);
  for (size_t i = 1; i < blocks.size(); ++i)
    CHECK(blocks[i].value <= blocks[i - 1].value + 1e-15);
  for (const auto& blk : blocks) {
    CHECK(std::abs(blk.vector.norm() - 1.0) < 1e-10);
    if (blk.usable)
      CHECK(blk.eps_vec == doctest::Approx(2.0 * b.eps_proj / blk.gap));
  }
}
