#include "qkd/keyrate.hpp"

#include "qkd/laser.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace qkd {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kTinyTrace = 1e-14;
}  // namespace

Mat ObjectiveMap::apply(const Mat& rho) const {
  return kraus * rho * kraus.adjoint();
}

Mat ObjectiveMap::pinch(const Mat& sigma) const {
  const int h = dim_out / 2;
  Mat out = Mat::Zero(dim_out, dim_out);
  out.topLeftCorner(h, h) = sigma.topLeftCorner(h, h);
  out.bottomRightCorner(h, h) = sigma.bottomRightCorner(h, h);
  return out;
}

ObjectiveMap build_objective_map(double t_x, int n_max) {
  auto povms = event_povms(t_x, n_max);
  Mat keep = povms[static_cast<int>(Event::ZEarly)] +
             povms[static_cast<int>(Event::ZLate)];
  Mat root = psd_sqrt(keep);
  const int dk = static_cast<int>(root.rows());
  ObjectiveMap map;
  map.dim_in = 3 * dk;
  map.dim_out = 2 * map.dim_in;
  map.kraus = Mat::Zero(map.dim_out, map.dim_in);
  // Row (r, a, b), column (a', b'): key bit r copies Alice's signal a when
  // a is a key signal, Bob filtered through the kept-detection square root.
  for (int r = 0; r < 2; ++r)
    for (int b = 0; b < dk; ++b)
      for (int b2 = 0; b2 < dk; ++b2)
        map.kraus((r * 3 + r) * dk + b, r * dk + b2) = root(b, b2);
  return map;
}

namespace {

struct Regularised {
  Mat a, b;
  double trace;
};

Regularised regularise(const ObjectiveMap& map, const Mat& rho) {
  Mat g = map.apply(rho);
  double t = g.trace().real();
  Regularised r;
  r.trace = t;
  if (t <= kTinyTrace) return r;
  Mat mix = (map.eps * t / map.dim_out) * Mat::Identity(map.dim_out, map.dim_out);
  r.a = (1.0 - map.eps) * g + mix;
  r.b = (1.0 - map.eps) * map.pinch(g) + mix;
  return r;
}

}  // namespace

double objective_value(const ObjectiveMap& map, const Mat& rho) {
  Regularised r = regularise(map, rho);
  if (r.trace <= kTinyTrace) return 0.0;
  Mat diff = herm_log(r.a) - herm_log(r.b);
  return (r.a * diff).trace().real() / kLn2;
}

Mat objective_gradient(const ObjectiveMap& map, const Mat& rho) {
  Regularised r = regularise(map, rho);
  if (r.trace <= kTinyTrace)
    return Mat::Zero(map.dim_in, map.dim_in);
  Mat x = (herm_log(r.a) - herm_log(r.b)) / kLn2;
  Mat grad = (1.0 - map.eps) * map.kraus.adjoint() * x * map.kraus +
             (map.eps / map.dim_out) * x.trace() *
                 (map.kraus.adjoint() * map.kraus);
  return 0.5 * (grad + grad.adjoint());
}

Mat alice_gram(const RVec& v, const std::array<double, 3>& priors) {
  const int d = static_cast<int>(v.size()) - 1;
  std::vector<Vec> sent;
  for (int i = 0; i < 3; ++i)
    sent.push_back(preparation_isometry(i, d) * v.cast<cplx>());
  Mat g(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      g(i, j) = std::sqrt(priors[i] * priors[j]) * sent[i].dot(sent[j]);
  return g;
}

namespace {

ConicProblem block_feasible_set(const BlockProblem& bp,
                                const std::vector<Mat>& povms, int dk) {
  ConicProblem prob;
  int rho = prob.add_var(3 * dk, 1.0);
  int slack = prob.add_var(3, 1.0);
  // The Gram matrix is typically rank deficient, which would leave the
  // marginal constraint with no strict interior; a small identity relaxation
  // restores one and only loosens the certified bound.
  constexpr double kFaceRelax = 1e-8;
  // Keep a tiny slack coupling even when the perturbation budget is zero so
  // the slack variable stays tied to the cone; enlarging the coupling only
  // widens the feasible set, so the certified bound stays valid.
  const double slack_coeff = std::max(bp.eps_vec, 1e-9);
  prob.lmis.push_back({3,
                       {lmi_partial_trace_b(rho, 3, dk),
                        lmi_scale(slack, -slack_coeff, 3)},
                       bp.rho_a + kFaceRelax * Mat::Identity(3, 3)});
  prob.add_scalar({{slack, Mat::Identity(3, 3)}}, Rel::Le, 1.0);
  Mat eye = Mat::Identity(3 * dk, 3 * dk);
  prob.add_scalar({{rho, eye}}, Rel::Le, 1.0);
  prob.add_scalar({{rho, eye}}, Rel::Ge, bp.trace_lo);
  for (int i = 0; i < 3; ++i) {
    Mat proj = Mat::Zero(3, 3);
    proj(i, i) = 1.0;
    for (int e = 0; e < kNumEvents; ++e) {
      Mat a = kron(proj, povms[e]);
      prob.add_scalar({{rho, a}}, Rel::Ge, bp.yield_lo(i, e));
      prob.add_scalar({{rho, a}}, Rel::Le, bp.yield_hi(i, e));
    }
  }
  return prob;
}

double golden_line_search(const std::function<double(double)>& f) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 40; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

BlockResult solve_block(const BlockProblem& bp, const ObjectiveMap& map,
                        SolverSession& session, const FrankWolfeOptions& opts) {
  auto povms = event_povms(bp.t_x, bp.n_max);
  const int dk = static_cast<int>(povms[0].rows());
  ConicProblem prob = block_feasible_set(bp, povms, dk);
  BlockResult res;

  // Initial feasible point.
  prob.sense = Sense::Max;
  prob.objective = {{0, Mat::Identity(3 * dk, 3 * dk)}};
  SolveResult init = session.solve(prob);
  if (init.status == SolveResult::Status::Infeasible ||
      init.status == SolveResult::Status::Failed) {
    res.feasible = false;
    return res;
  }
  Mat rho = init.primal[0];

  double best_lower = 0.0;
  double best_upper = std::numeric_limits<double>::infinity();
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    double f_cur = objective_value(map, rho);
    best_upper = std::min(best_upper, f_cur);
    Mat grad = objective_gradient(map, rho);
    // Solve the linearised subproblem with a unit-scale objective; large
    // gradient norms otherwise degrade the interior-point conditioning.
    const double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
    prob.sense = Sense::Min;
    prob.objective = {{0, Mat(grad / scale)}};
    SolveResult sub = session.solve(prob);
    sub.certified_value *= scale;
    if (sub.status == SolveResult::Status::Failed ||
        sub.status == SolveResult::Status::Infeasible) {
      if (opts.verbose)
        std::fprintf(stderr, "fw it=%d subproblem %s: %s\n", it,
                     sub.status == SolveResult::Status::Infeasible
                         ? "infeasible"
                         : "failed",
                     sub.detail.c_str());
      res.feasible = sub.status != SolveResult::Status::Infeasible;
      break;
    }
    double at_rho = (grad * rho).trace().real();
    if (opts.verbose)
      std::fprintf(stderr,
                   "fw it=%d f=%.8f cert=%.8f at_rho=%.8f status=%s\n", it,
                   f_cur, sub.certified_value, at_rho, sub.detail.c_str());
    // Convexity: min f >= f(rho) + min_feasible <grad, sigma> - <grad, rho>,
    // and the inner min is itself certified (dual + cap inflation).
    best_lower = std::max(best_lower, f_cur + sub.certified_value - at_rho);
    if (best_upper - best_lower <=
        opts.rel_tol * std::max(1.0, std::abs(best_upper)))
      break;
    Mat sigma = sub.primal[0];
    double slope = (grad * (sigma - rho)).trace().real();
    if (slope > -1e-12) break;
    Mat dir = sigma - rho;
    double gamma = golden_line_search(
        [&](double g) { return objective_value(map, rho + g * dir); });
    rho = psd_clip(rho + gamma * dir);
    double f_new = objective_value(map, rho);
    if (prev - f_new < opts.rel_tol * std::max(1.0, std::abs(f_new)) &&
        it > 0)
      break;
    prev = f_new;
  }
  res.entropy_bound = std::max(0.0, best_lower);
  res.upper_value = std::isfinite(best_upper) ? best_upper : 0.0;
  res.gap = std::abs(res.upper_value - res.entropy_bound) /
            std::max(1.0, std::abs(res.upper_value));
  return res;
}

double delta_leak(const ProtocolParams& p, const Statistics& st, double f_ec) {
  // Joint distribution over (Alice key bit, Bob Z bin) at signal intensity;
  // Alice bit 1 = early pulse = Z-early click expected.
  double leak = 0.0;
  for (int e : {static_cast<int>(Event::ZEarly), static_cast<int>(Event::ZLate)}) {
    double j0 = p.priors[0] * st.gamma[0][0][e];
    double j1 = p.priors[1] * st.gamma[1][0][e];
    double pe = j0 + j1;
    if (pe > 0.0) leak += pe * binary_entropy(j0 / pe);
  }
  return f_ec * leak;
}

KeyRatePoint total_keyrate(const ProtocolParams& p, double q,
                           const KeyRateOptions& opts, SolverSession& session) {
  KeyRatePoint point;
  point.distance_km = p.distance_km;
  point.q = q;
  session.reset_stats();
  Statistics st = simulate_statistics(p);
  point.leak = delta_leak(p, st, opts.f_ec);

  ProjectionBudget budget = model_budget(p.mu_signal, q, opts.d);
  Mat rho_model = model_state(p.mu_signal, q, opts.d);
  auto blocks =
      approx_eigendecomposition(rho_model, opts.d, budget, opts.n_blocks);

  point.eps_proj = budget.eps_proj;

  std::vector<DecoyInstance> inst;
  for (int i = 0; i < 3; ++i)
    inst.push_back(make_decoy_instance(p, st, q, i, opts.d, opts.n_max));
  point.intensities = inst[0].intensities;
  point.w_n = inst[0].W_N;
  ObjectiveMap map = build_objective_map(p.t_x, opts.n_max);
  const int dk = static_cast<int>(inst[0].povms[0].rows());
  Mat eye_k = Mat::Identity(dk, dk);

  double total = 0.0;
  for (const auto& blk : blocks) {
    BlockReport rep;
    rep.block = blk.index;
    rep.weight = std::max(0.0, blk.value - budget.eps_proj);
    rep.eps_vec = blk.eps_vec;
    rep.usable = blk.usable;
    bool wanted = std::find(opts.entropy_blocks.begin(),
                            opts.entropy_blocks.end(),
                            blk.index) != opts.entropy_blocks.end();
    if (!wanted || !blk.usable || rep.weight <= 0.0) {
      point.blocks.push_back(rep);
      continue;
    }
    Mat sigma = (blk.vector * blk.vector.transpose()).cast<cplx>();
    BlockProblem bp;
    bp.rho_a = alice_gram(blk.vector, p.priors);
    bp.eps_vec = blk.eps_vec;
    bp.priors = p.priors;
    bp.t_x = p.t_x;
    bp.n_max = opts.n_max;
    bp.yield_lo.resize(3, kNumEvents);
    bp.yield_hi.resize(3, kNumEvents);
    double trace_lo = 0.0;
    bool ok_all = true;
    for (int i = 0; i < 3; ++i) {
      for (int e = 0; e < kNumEvents; ++e) {
        bool ok = true;
        Interval iv =
            widen(yield_bounds(inst[i], sigma, inst[i].povms[e], session, &ok),
                  blk.eps_vec);
        ok_all = ok_all && ok;
        bp.yield_lo(i, e) = p.priors[i] * iv.lo;
        bp.yield_hi(i, e) = p.priors[i] * iv.hi;
      }
      bool ok = true;
      Interval iv_pi =
          widen(yield_bounds(inst[i], sigma, eye_k, session, &ok), blk.eps_vec);
      ok_all = ok_all && ok;
      trace_lo += p.priors[i] * iv_pi.lo;
    }
    bp.trace_lo = std::clamp(trace_lo, 0.0, 1.0);
    BlockResult br = solve_block(bp, map, session, opts.fw);
    point.solver_clean = point.solver_clean && ok_all && br.feasible;
    rep.entropy_bound = br.entropy_bound;
    rep.contribution = rep.weight * br.entropy_bound;
    total += rep.contribution;
    point.blocks.push_back(rep);
  }
  point.raw_rate = total - point.leak;
  point.rate = std::max(0.0, point.raw_rate);
  point.max_sdp_gap = session.max_gap();
  point.sdp_count = session.solve_count();
  return point;
}

}  // namespace qkd
