#include "qkd/laser.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qkd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// E[e^{i k phi}] for k = 0..n_moments-1 (trapezoid on the periodic grid is
// spectrally accurate for smooth densities).
std::vector<cplx> circular_moments(const PhaseDistribution& dist, int n_moments,
                                   int grid_points) {
  std::vector<cplx> m(n_moments, 0.0);
  double total = 0.0;
  for (int g = 0; g < grid_points; ++g) {
    double phi = kTwoPi * g / grid_points;
    total += dist.density(phi);
  }
  double dphi = kTwoPi / grid_points;
  double cont_mass = total * dphi;
  for (int k = 0; k < n_moments; ++k) {
    cplx acc = 0.0;
    for (int g = 0; g < grid_points; ++g) {
      double phi = kTwoPi * g / grid_points;
      acc += dist.density(phi) * std::polar(1.0, k * phi);
    }
    m[k] = acc * dphi + dist.delta_weight * std::polar(1.0, k * dist.delta_phase);
  }
  double mass = cont_mass + dist.delta_weight;
  if (std::abs(mass - 1.0) > 1e-8)
    throw std::invalid_argument("phase distribution not normalised");
  return m;
}

}  // namespace

double wrapped_normal_density(double phi, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  int wraps = static_cast<int>(std::ceil(6.0 * sigma / kTwoPi)) + 2;
  double s = 0.0;
  for (int k = -wraps; k <= wraps; ++k) {
    double x = phi + kTwoPi * k;
    s += std::exp(-0.5 * x * x / (sigma * sigma));
  }
  return s / (sigma * std::sqrt(kTwoPi));
}

PhaseDistribution PhaseDistribution::delta_mix(double q) {
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("q outside [0,1]");
  PhaseDistribution d;
  d.density = [q](double) { return q / kTwoPi; };
  d.delta_weight = 1.0 - q;
  d.delta_phase = 0.0;
  return d;
}

PhaseDistribution PhaseDistribution::wrapped_normal(double sigma) {
  PhaseDistribution d;
  d.density = [sigma](double phi) { return wrapped_normal_density(phi, sigma); };
  return d;
}

PhaseDistribution PhaseDistribution::uniform() { return delta_mix(1.0); }

double PhaseDistribution::randomised_weight(int grid_points) const {
  double lo = density(0.0);
  for (int g = 1; g < grid_points; ++g)
    lo = std::min(lo, density(kTwoPi * g / grid_points));
  return kTwoPi * lo;
}

double PhaseDistribution::first_moment_magnitude(int grid_points) const {
  return std::abs(circular_moments(*this, 2, grid_points)[1]);
}

Mat laser_state(const PhaseDistribution& dist, double mu, int cutoff,
                int grid_points) {
  Vec c = coherent_ket(std::sqrt(mu), cutoff);
  auto m = circular_moments(dist, cutoff + 1, grid_points);
  Mat rho(cutoff + 1, cutoff + 1);
  for (int a = 0; a <= cutoff; ++a)
    for (int b = 0; b <= cutoff; ++b) {
      cplx mom = a >= b ? m[a - b] : std::conj(m[b - a]);
      rho(a, b) = c(a) * std::conj(c(b)) * mom;
    }
  return rho;
}

Mat model_state(double mu, double q, int cutoff) {
  Mat rho = Mat::Zero(cutoff + 1, cutoff + 1);
  for (int n = 0; n <= cutoff; ++n) rho(n, n) = q * poisson_pmf(mu, n);
  Vec c = coherent_ket(std::sqrt(mu), cutoff);
  rho += (1.0 - q) * c * c.adjoint();
  return rho;
}

double q_from_visibility(double visibility) {
  if (visibility < 0.0 || visibility > 1.0)
    throw std::invalid_argument("visibility outside [0,1]");
  return 1.0 - std::sqrt(visibility);
}

Mat phase_modulator_channel(const Mat& input, const PhaseDistribution& dist,
                            double q, int grid_points) {
  if (dist.randomised_weight(grid_points) < q - 1e-9)
    throw std::invalid_argument(
        "distribution does not contain a uniform component of weight q");
  // q * (full twirl) + (1-q) * (phase shift by the renormalised remainder)
  // multiplies entry (a,b) by the full distribution's circular moment of
  // order a-b, independent of the split point q.
  int n = static_cast<int>(input.rows());
  auto m = circular_moments(dist, n, grid_points);
  Mat out(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      cplx mom = a >= b ? m[a - b] : std::conj(m[b - a]);
      out(a, b) = input(a, b) * mom;
    }
  return out;
}

Mat dephase_diagonal(const Mat& input) {
  Mat out = Mat::Zero(input.rows(), input.cols());
  out.diagonal() = input.diagonal();
  return out;
}

PhaseDistribution residual_distribution(const PhaseDistribution& dist,
                                        double q) {
  if (q >= 1.0) return PhaseDistribution::uniform();
  if (dist.randomised_weight() < q - 1e-9)
    throw std::invalid_argument(
        "distribution does not contain a uniform component of weight q");
  PhaseDistribution r;
  auto base = dist.density;
  r.density = [base, q](double phi) {
    return (base(phi) - q / kTwoPi) / (1.0 - q);
  };
  r.delta_weight = dist.delta_weight / (1.0 - q);
  r.delta_phase = dist.delta_phase;
  return r;
}

}  // namespace qkd
