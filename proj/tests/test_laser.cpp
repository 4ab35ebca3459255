#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "qkd/laser.hpp"

using namespace qkd;

TEST_CASE("wrapped normal density is a normalised distribution") {
  for (double sigma : {0.3, 1.0, 2.5}) {
    int n = 4096;
    double mass = 0.0;
    for (int g = 0; g < n; ++g)
      mass += wrapped_normal_density(2 * std::numbers::pi * g / n, sigma);
    mass *= 2 * std::numbers::pi / n;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("uniform phase turns a laser into a Poissonian diagonal") {
  double mu = 0.6;
  Mat s = laser_state(PhaseDistribution::uniform(), mu, 10);
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b) {
      if (a == b)
        CHECK(std::abs(s(a, a) - poisson_pmf(mu, a)) < 1e-12);
      else
        CHECK(std::abs(s(a, b)) < 1e-12);
    }
}

TEST_CASE("delta-mix laser state equals the two-component model state") {
  double mu = 0.5, q = 0.9;
  Mat s = laser_state(PhaseDistribution::delta_mix(q), mu, 10);
  Mat m = model_state(mu, q, 10);
  CHECK((s - m).norm() < 1e-10);
}

TEST_CASE("first circular moment magnitudes") {
  CHECK(PhaseDistribution::delta_mix(0.7).first_moment_magnitude() ==
        doctest::Approx(0.3).epsilon(1e-9));
  CHECK(PhaseDistribution::uniform().first_moment_magnitude() ==
        doctest::Approx(0.0).epsilon(1e-9));
  double sigma = 0.8;
  CHECK(PhaseDistribution::wrapped_normal(sigma).first_moment_magnitude() ==
        doctest::Approx(std::exp(-0.5 * sigma * sigma)).epsilon(1e-9));
}

TEST_CASE("extractable uniform weight") {
  CHECK(PhaseDistribution::delta_mix(0.65).randomised_weight() ==
        doctest::Approx(0.65).epsilon(1e-9));
  CHECK(PhaseDistribution::uniform().randomised_weight() ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("visibility characterisation endpoints") {
  CHECK(q_from_visibility(0.0) == doctest::Approx(1.0));
  CHECK(q_from_visibility(1.0) == doctest::Approx(0.0));
  CHECK(q_from_visibility(0.0019) == doctest::Approx(0.9564).epsilon(5e-5));
  CHECK_THROWS(q_from_visibility(-0.1));
  CHECK_THROWS(q_from_visibility(1.1));
}

TEST_CASE("phase modulation with the full twirl dephases") {
  double mu = 0.5;
  Mat coh = laser_state(PhaseDistribution::delta_mix(0.0), mu, 8);
  Mat out = phase_modulator_channel(coh, PhaseDistribution::uniform(), 1.0);
  CHECK((out - dephase_diagonal(coh)).norm() < 1e-10);
  CHECK(std::abs(out.trace() - coh.trace()) < 1e-12);
}

TEST_CASE("phase modulation requires the claimed uniform component") {
  Mat coh = laser_state(PhaseDistribution::delta_mix(0.0), 0.5, 6);
  CHECK_THROWS(
      phase_modulator_channel(coh, PhaseDistribution::delta_mix(0.3), 0.9));
}

TEST_CASE("residual modulation maps the model state onto the laser state") {
  double mu = 0.5;
  int cut = 8;
  double budget = 1e-8 + poisson_tail(mu, cut);
  SUBCASE("delta mix") {
    double q = 0.93;
    PhaseDistribution full = PhaseDistribution::delta_mix(q);
    Mat mapped = phase_modulator_channel(model_state(mu, q, cut),
                                         residual_distribution(full, q), 0.0);
    CHECK(0.5 * trace_norm(mapped - laser_state(full, mu, cut)) < budget);
  }
  SUBCASE("wrapped normal") {
    PhaseDistribution full = PhaseDistribution::wrapped_normal(2.0);
    double q = full.randomised_weight();
    Mat mapped = phase_modulator_channel(model_state(mu, q, cut),
                                         residual_distribution(full, q), 0.0);
    CHECK(0.5 * trace_norm(mapped - laser_state(full, mu, cut)) < budget);
  }
}
