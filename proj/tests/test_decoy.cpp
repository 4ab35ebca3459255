#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qkd/decoy.hpp"
#include "qkd/laser.hpp"

using namespace qkd;

namespace {

// True statistic of a virtual source state sigma for one signal: prepare,
// apply pure loss, measure one event POVM element.  Everything stays inside
// the <= n_max sector because sigma lives there and loss only lowers photon
// number.
double true_virtual_statistic(const ProtocolParams& p, int signal,
                              const Mat& sigma_source, const Mat& povm,
                              int n_max) {
  Mat v = preparation_isometry(signal, n_max);
  // sigma_source is on the single-mode photon-number block; embed the <=n_max
  // corner through the preparation.
  int dn = n_max + 1;
  Mat corner = sigma_source.topLeftCorner(dn, dn);
  Mat flying = v * corner * v.adjoint();
  ModeSpace s = ModeSpace::total_cutoff(2, n_max);
  Mat received = Mat::Zero(s.dim(), s.dim());
  for (const auto& k : two_mode_loss_kraus(p.eta(), s))
    received += k * flying * k.adjoint();
  return (povm * received).trace().real();
}

}  // namespace

TEST_CASE("interval widening clamps to the unit interval") {
  Interval iv{0.2, 0.9};
  Interval w = widen(iv, 0.05);
  CHECK(w.lo == doctest::Approx(0.15));
  CHECK(w.hi == doctest::Approx(0.95));
  Interval e = widen({0.01, 0.99}, 0.05);
  CHECK(e.lo == 0.0);
  CHECK(e.hi == 1.0);
}

TEST_CASE("decoy instance dedupes repeated intensities") {
  ProtocolParams p;  // signal 0.5, decoys {0, 0.5}
  Statistics st = simulate_statistics(p);
  DecoyInstance inst = make_decoy_instance(p, st, 1.0, 0, 6, 2);
  CHECK(inst.intensities.size() == 2);
  CHECK(inst.states.size() == 2);
  CHECK(inst.W_N.size() == 2);
}

TEST_CASE("certified yield intervals sandwich the true virtual statistic") {
  ProtocolParams p;
  SolverSession session;
  int d = 6, n_max = 2;
  for (double dist : {0.0, 30.0}) {
    p.distance_km = dist;
    Statistics st = simulate_statistics(p);
    // Single-photon virtual state (fully phase-randomised source).
    Mat sigma = Mat::Zero(d + 1, d + 1);
    sigma(1, 1) = 1.0;
    auto povms = event_povms(p.t_x, n_max);
    for (int signal = 0; signal < 3; ++signal) {
      DecoyInstance inst = make_decoy_instance(p, st, 1.0, signal, d, n_max);
      for (int e : {static_cast<int>(Event::ZLate),
                    static_cast<int>(Event::NoClick)}) {
        bool ok = true;
        Interval iv = yield_bounds(inst, sigma, inst.povms[e], session, &ok);
        CHECK(ok);
        double truth = true_virtual_statistic(p, signal, sigma, povms[e], n_max);
        CHECK(iv.lo <= truth + 1e-7);
        CHECK(iv.hi >= truth - 1e-7);
        CHECK(iv.lo >= -1e-12);
        CHECK(iv.hi <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("yield bounds with weight above the cutoff widen only upward") {
  ProtocolParams p;
  SolverSession session;
  Statistics st = simulate_statistics(p);
  int d = 6, n_max = 2;
  DecoyInstance inst = make_decoy_instance(p, st, 1.0, 0, d, n_max);
  Mat sigma = Mat::Zero(d + 1, d + 1);
  sigma(1, 1) = 1.0;
  Mat f = inst.povms[static_cast<int>(Event::ZLate)];
  bool ok = true;
  Interval base = yield_bounds(inst, sigma, f, session, &ok);
  Interval wide = yield_bounds_general(inst, sigma, f, 0.05, session, &ok);
  CHECK(wide.lo == doctest::Approx(base.lo).epsilon(1e-5));
  CHECK(wide.hi >= base.hi - 1e-9);
  CHECK(wide.hi >= std::min(1.0, base.hi + 0.05 - 1e-7));
}

TEST_CASE("classical decoy LP brackets the single-photon yield") {
  ProtocolParams p;
  SolverSession session;
  Statistics st = simulate_statistics(p);
  RMat gamma(st.intensities.size(), kNumEvents);
  for (size_t m = 0; m < st.intensities.size(); ++m)
    for (int e = 0; e < kNumEvents; ++e) gamma(m, e) = st.gamma[0][m][e];
  int n_max = 2;
  Mat sigma = Mat::Zero(11, 11);
  sigma(1, 1) = 1.0;
  auto povms = event_povms(p.t_x, n_max);
  int event = static_cast<int>(Event::ZLate);
  Interval iv = standard_decoy_lp(st.intensities, gamma, event, 1, 8, session);
  double truth = true_virtual_statistic(p, 0, sigma, povms[event], n_max);
  CHECK(iv.lo <= truth + 1e-6);
  CHECK(iv.hi >= truth - 1e-6);
  CHECK(iv.lo > 0.5);  // the bound is informative, not vacuous
}
