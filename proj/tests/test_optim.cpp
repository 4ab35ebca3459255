#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "qkd/optim.hpp"

using namespace qkd;

namespace {

Mat random_hermitian(int n, std::mt19937& rng, bool complex_entries = true) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = complex_entries ? cplx(g(rng), g(rng)) : cplx(g(rng), 0.0);
  return 0.5 * (m + m.adjoint());
}

double positive_part_sum(const Mat& h) {
  EigenSystem es = hermitian_eig(h);
  double s = 0.0;
  for (int i = 0; i < es.values.size(); ++i)
    s += std::max(0.0, es.values(i));
  return s;
}

}  // namespace

TEST_CASE("complex embedding round trip") {
  std::mt19937 rng(1);
  Mat h = random_hermitian(4, rng);
  RMat e = embed_complex(h);
  CHECK((e - e.transpose()).norm() < 1e-13);
  CHECK((unembed_complex(e) - h).norm() < 1e-13);
}

TEST_CASE("trace minimisation with a floor") {
  ConicProblem p;
  int x = p.add_var(3, 10.0);
  Mat eye = Mat::Identity(3, 3);
  p.add_scalar({{x, eye}}, Rel::Ge, 2.5);
  p.sense = Sense::Min;
  p.objective = {{x, eye}};
  SolverSession s;
  SolveResult r = s.solve(p);
  REQUIRE(r.status == SolveResult::Status::Optimal);
  CHECK(r.primal_value == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(r.certified_value <= 2.5 + 1e-9);   // valid lower bound
  CHECK(r.certified_value >= 2.5 - 1e-6);   // and a tight one
  CHECK(r.gap < 1e-6);
}

TEST_CASE("maximum overlap with a capped variable: real and complex data") {
  std::mt19937 rng(2);
  for (bool complex_entries : {false, true}) {
    Mat f = random_hermitian(4, rng, complex_entries);
    ConicProblem p;
    int x = p.add_var(4, 4.0);
    // X <= I via an LMI.
    p.lmis.push_back({4, {lmi_scale(x, 1.0, 4)}, Mat::Identity(4, 4)});
    p.sense = Sense::Max;
    p.objective = {{x, f}};
    SolverSession s;
    SolveResult r = s.solve(p);
    REQUIRE(r.status == SolveResult::Status::Optimal);
    double truth = positive_part_sum(f);
    CHECK(r.primal_value == doctest::Approx(truth).epsilon(1e-6));
    CHECK(r.certified_value >= truth - 1e-6);  // upper bound for Max
    CHECK(r.certified_value <= truth + 1e-5);
    CHECK(r.gap < 1e-6);
  }
}

TEST_CASE("equality constraints pin the trace exactly") {
  ConicProblem p;
  int x = p.add_var(3, 5.0);
  Mat eye = Mat::Identity(3, 3);
  Mat h(3, 3);
  h << 1, 0, 0, 0, 2, 0, 0, 0, 3;
  p.add_scalar({{x, eye}}, Rel::Eq, 0.7);
  p.sense = Sense::Max;
  p.objective = {{x, h}};
  SolverSession s;
  SolveResult r = s.solve(p);
  REQUIRE(r.status == SolveResult::Status::Optimal);
  // All weight on the largest diagonal entry.
  CHECK(r.primal_value == doctest::Approx(2.1).epsilon(1e-6));
  CHECK(std::abs(r.primal[0].trace().real() - 0.7) < 1e-6);
  CHECK(r.gap < 1e-6);
}

TEST_CASE("partial-trace LMI caps the marginal") {
  std::mt19937 rng(4);
  Mat rho_a = random_hermitian(2, rng);
  rho_a = psd_clip(rho_a);
  rho_a /= rho_a.trace();
  ConicProblem p;
  int x = p.add_var(6, 2.0);
  p.lmis.push_back({2, {lmi_partial_trace_b(x, 2, 3)}, rho_a});
  p.sense = Sense::Max;
  p.objective = {{x, Mat::Identity(6, 6)}};
  SolverSession s;
  SolveResult r = s.solve(p);
  REQUIRE(r.status == SolveResult::Status::Optimal);
  CHECK(r.primal_value == doctest::Approx(1.0).epsilon(1e-6));
  // The recovered primal respects the LMI up to solver accuracy.
  Mat marg = Mat::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < 3; ++k) marg(a, b) += r.primal[0](a * 3 + k, b * 3 + k);
  EigenSystem es = hermitian_eig(rho_a - marg);
  CHECK(es.values.minCoeff() > -1e-6);
}

TEST_CASE("two coupled variables") {
  // max Tr X + Tr Y  s.t.  Tr X + 2 Tr Y <= 1: optimum puts everything on X.
  ConicProblem p;
  int x = p.add_var(2, 1.0);
  int y = p.add_var(2, 1.0);
  Mat eye = Mat::Identity(2, 2);
  p.add_scalar({{x, eye}, {y, Mat(2.0 * eye)}}, Rel::Le, 1.0);
  p.sense = Sense::Max;
  p.objective = {{x, eye}, {y, eye}};
  SolverSession s;
  SolveResult r = s.solve(p);
  REQUIRE(r.status == SolveResult::Status::Optimal);
  CHECK(r.primal_value == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.gap < 1e-6);
}

TEST_CASE("infeasible problems are flagged, not silently bounded") {
  ConicProblem p;
  int x = p.add_var(2, 1.0);
  Mat eye = Mat::Identity(2, 2);
  p.add_scalar({{x, eye}}, Rel::Le, -1.0);  // Tr X <= -1 impossible for PSD X
  p.sense = Sense::Min;
  p.objective = {{x, eye}};
  SolverSession s;
  SolveResult r = s.solve(p);
  CHECK(r.status != SolveResult::Status::Optimal);
}

TEST_CASE("certificates stay valid under objective rescaling") {
  std::mt19937 rng(6);
  Mat f = random_hermitian(3, rng);
  SolverSession s;
  double reference = 0.0;
  for (double scale : {1.0, 128.0}) {
    ConicProblem p;
    int x = p.add_var(3, 1.0);
    Mat eye = Mat::Identity(3, 3);
    p.add_scalar({{x, eye}}, Rel::Le, 1.0);
    p.sense = Sense::Min;
    p.objective = {{x, Mat(scale * f)}};
    SolveResult r = s.solve(p);
    REQUIRE(r.status == SolveResult::Status::Optimal);
    if (scale == 1.0)
      reference = r.certified_value;
    else
      CHECK(r.certified_value ==
            doctest::Approx(scale * reference).epsilon(1e-6));
  }
}

TEST_CASE("session gap statistics accumulate and reset") {
  SolverSession s;
  s.reset_stats();
  CHECK(s.solve_count() == 0);
  ConicProblem p;
  int x = p.add_var(2, 1.0);
  Mat eye = Mat::Identity(2, 2);
  p.add_scalar({{x, eye}}, Rel::Ge, 1.0);
  p.sense = Sense::Min;
  p.objective = {{x, eye}};
  SolveResult r = s.solve(p);
  REQUIRE(r.status == SolveResult::Status::Optimal);
  CHECK(s.solve_count() == 1);
  CHECK(s.max_gap() == doctest::Approx(r.gap));
  s.reset_stats();
  CHECK(s.solve_count() == 0);
  CHECK(s.max_gap() == 0.0);
}
