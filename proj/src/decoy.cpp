#include "qkd/decoy.hpp"

#include "qkd/laser.hpp"

#include <algorithm>
#include <cmath>

namespace qkd {

DecoyInstance make_decoy_instance(const ProtocolParams& p,
                                  const Statistics& st, double q, int signal,
                                  int d, int n_max) {
  DecoyInstance inst;
  inst.signal = signal;
  inst.d = d;
  inst.n_max = n_max;
  // Distinct intensities only (the signal intensity often reappears as a
  // decoy; duplicate rows would make the constraint system rank deficient).
  std::vector<int> src;
  for (int m = 0; m < static_cast<int>(st.intensities.size()); ++m) {
    bool seen = false;
    for (int k : src) seen = seen || st.intensities[k] == st.intensities[m];
    if (!seen) {
      src.push_back(m);
      inst.intensities.push_back(st.intensities[m]);
    }
  }
  inst.povms = event_povms(p.t_x, n_max);
  const int nmu = static_cast<int>(inst.intensities.size());
  inst.gamma.resize(nmu, kNumEvents);
  for (int m = 0; m < nmu; ++m) {
    double mu = inst.intensities[m];
    int signal_row = src[m];
    inst.states.push_back(model_state(mu, q, d));
    for (int e = 0; e < kNumEvents; ++e)
      inst.gamma(m, e) = st.gamma[signal][signal_row][e];
    double w = poisson_tail(mu, d);
    inst.w_M.push_back(w);
    inst.eps_M.push_back((1.0 - q) * std::sqrt(std::max(w, 1e-18)));
    inst.W_N.push_back(weight_above_cutoff_bound(
        st.cross_click[signal][signal_row], n_max, p.t_x));
  }
  inst.trace_cap = d + 1;
  return inst;
}

ConicProblem decoy_feasible_set(const DecoyInstance& inst) {
  const int dm = inst.d + 1;
  const int dk = static_cast<int>(inst.povms[0].rows());
  ConicProblem prob;
  int j = prob.add_var(dm * dk, inst.trace_cap);
  // Channel marginal: Tr_received J <= Pi_M (identity on the source block).
  prob.lmis.push_back(
      {dm, {lmi_partial_trace_b(j, dm, dk)}, Mat::Identity(dm, dm)});
  const int nmu = static_cast<int>(inst.intensities.size());
  for (int m = 0; m < nmu; ++m) {
    Mat stateT = inst.states[m].transpose();
    for (int e = 0; e < kNumEvents; ++e) {
      Mat a = kron(stateT, inst.povms[e]);
      double lo = std::max(
          0.0,
          inst.gamma(m, e) - inst.W_N[m] - inst.w_M[m] - 2.0 * inst.eps_M[m]);
      double hi = std::min(1.0, inst.gamma(m, e) + inst.eps_M[m]);
      // Keep a strict interior: exact or near-exact windows (ideal detectors
      // make some observations deterministic) would put the whole feasible
      // set on a face of the PSD cone and stall the interior-point method.
      // Widening is a relaxation, so certified bounds stay valid.
      constexpr double kWindowFloor = 5e-8;
      lo -= kWindowFloor;
      hi += kWindowFloor;
      prob.add_scalar({{j, a}}, Rel::Ge, std::max(-kWindowFloor, lo));
      prob.add_scalar({{j, a}}, Rel::Le, hi);
    }
  }
  return prob;
}

Interval yield_bounds(const DecoyInstance& inst, const Mat& sigma,
                      const Mat& F, SolverSession& session, bool* ok) {
  ConicProblem prob = decoy_feasible_set(inst);
  Mat obj = kron(sigma.transpose(), F);
  prob.objective = {{0, obj}};
  bool good = true;
  Interval iv;
  prob.sense = Sense::Min;
  SolveResult lo = session.solve(prob);
  prob.sense = Sense::Max;
  SolveResult hi = session.solve(prob);
  auto usable = [](const SolveResult& r) {
    return r.status == SolveResult::Status::Optimal ||
           r.status == SolveResult::Status::NumericalTrouble;
  };
  if (usable(lo) && std::isfinite(lo.certified_value))
    iv.lo = std::clamp(lo.certified_value, 0.0, 1.0);
  else {
    iv.lo = 0.0;
    good = false;
  }
  if (usable(hi) && std::isfinite(hi.certified_value))
    iv.hi = std::clamp(hi.certified_value, 0.0, 1.0);
  else {
    iv.hi = 1.0;
    good = false;
  }
  if (iv.hi < iv.lo) iv = {0.0, 1.0};  // numerically inconsistent: give up
  if (ok) *ok = good;
  return iv;
}

Interval yield_bounds_general(const DecoyInstance& inst, const Mat& sigma,
                              const Mat& F_low_block, double weight_above,
                              SolverSession& session, bool* ok) {
  Interval iv = yield_bounds(inst, sigma, F_low_block, session, ok);
  iv.hi = std::min(1.0, iv.hi + std::max(0.0, weight_above));
  return iv;
}

Interval widen(Interval iv, double eps_vec) {
  return {std::max(0.0, iv.lo - eps_vec), std::min(1.0, iv.hi + eps_vec)};
}

Interval standard_decoy_lp(const std::vector<double>& intensities,
                           const RMat& gamma, int event, int n_target,
                           int n_lp, SolverSession& session) {
  ConicProblem prob;
  std::vector<int> y;
  for (int n = 0; n <= n_lp; ++n) {
    int v = prob.add_var(1, 1.0);
    prob.add_scalar({{v, Mat::Identity(1, 1)}}, Rel::Le, 1.0);
    y.push_back(v);
  }
  const int nmu = static_cast<int>(intensities.size());
  for (int m = 0; m < nmu; ++m) {
    std::vector<LinTerm> terms;
    for (int n = 0; n <= n_lp; ++n)
      terms.push_back(
          {y[n], poisson_pmf(intensities[m], n) * Mat::Identity(1, 1)});
    double tail = poisson_tail(intensities[m], n_lp);
    prob.add_scalar(terms, Rel::Le, gamma(m, event));
    prob.add_scalar(std::move(terms), Rel::Ge,
                    std::max(0.0, gamma(m, event) - tail));
  }
  prob.objective = {{y[n_target], Mat::Identity(1, 1)}};
  prob.sense = Sense::Min;
  SolveResult lo = session.solve(prob);
  prob.sense = Sense::Max;
  SolveResult hi = session.solve(prob);
  Interval iv;
  iv.lo = std::isfinite(lo.certified_value)
              ? std::clamp(lo.certified_value, 0.0, 1.0)
              : 0.0;
  iv.hi = std::isfinite(hi.certified_value)
              ? std::clamp(hi.certified_value, 0.0, 1.0)
              : 1.0;
  return iv;
}

}  // namespace qkd
