#include "qkd/optim.hpp"

#include "bridge_internal.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace qkd {

int ConicProblem::add_var(int dim, double trace_cap) {
  vars.push_back({dim, trace_cap});
  return static_cast<int>(vars.size()) - 1;
}

void ConicProblem::add_scalar(std::vector<LinTerm> terms, Rel rel, double rhs) {
  scalars.push_back({std::move(terms), rel, rhs});
}

LmiMap lmi_partial_trace_b(int var, int da, int db) {
  LmiMap m;
  m.var = var;
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < db; ++k)
        m.triplets.push_back({i, j, i * db + k, j * db + k, 1.0});
  return m;
}

LmiMap lmi_scale(int var, double s, int dim) {
  LmiMap m;
  m.var = var;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m.triplets.push_back({i, j, i, j, s});
  return m;
}

RMat embed_complex(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  RMat y(2 * n, 2 * n);
  y.topLeftCorner(n, n) = m.real();
  y.bottomRightCorner(n, n) = m.real();
  y.bottomLeftCorner(n, n) = m.imag();
  y.topRightCorner(n, n) = -m.imag();
  return y;
}

Mat unembed_complex(const RMat& y) {
  const int n = static_cast<int>(y.rows()) / 2;
  Mat m(n, n);
  m.real() = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  m.imag() = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  return m;
}

namespace {

RMat herm_real(const Mat& m) {
  RMat r = m.real();
  return 0.5 * (r + r.transpose());
}

struct RealTriplet {
  int out_r, out_c, in_r, in_c;
  double v;
};

struct RealProblem {
  std::vector<int> dims;
  std::vector<double> caps;
  std::vector<RMat> C;  // objective, already sign-adjusted to Min
  struct Scalar {
    std::vector<std::pair<int, RMat>> terms;
    double rhs;
    bool is_eq;  // equality: free dual, no sign clamp
  };
  std::vector<Scalar> scal;  // all in <= or == form
  struct Lmi {
    int dim;
    std::vector<std::pair<int, std::vector<RealTriplet>>> maps;
    RMat rhs;
  };
  std::vector<Lmi> lmis;
  bool embedded = false;
  double sign = 1.0;  // +1 Min, -1 Max
};

bool data_is_real(const ConicProblem& p) {
  auto ok = [](const Mat& m) {
    return m.imag().cwiseAbs().maxCoeff() < 1e-13;
  };
  for (const auto& t : p.objective)
    if (!ok(t.coeff)) return false;
  for (const auto& s : p.scalars)
    for (const auto& t : s.terms)
      if (!ok(t.coeff)) return false;
  for (const auto& l : p.lmis) {
    if (!ok(l.rhs)) return false;
    for (const auto& m : l.maps)
      for (const auto& t : m.triplets)
        if (std::abs(t.v.imag()) > 1e-13) return false;
  }
  return true;
}

// Expand a complex superoperator triplet acting on the embedded symmetric
// variable Y = [[Xre, -Xim], [Xim, Xre]] into real triplets whose output is
// the embedding of the complex output.
void expand_triplet(const LmiTriplet& t, int in_n, int out_n,
                    std::vector<RealTriplet>& out) {
  // X(in_r,in_c) = 0.5*(Y[r,c] + Y[r+n,c+n]) + 0.5i*(Y[r+n,c] - Y[r,c+n])
  struct Src {
    int r, c;
    cplx w;
  };
  const int n = in_n, d = out_n;
  Src srcs[4] = {{t.in_r, t.in_c, 0.5},
                 {t.in_r + n, t.in_c + n, 0.5},
                 {t.in_r + n, t.in_c, cplx(0.0, 0.5)},
                 {t.in_r, t.in_c + n, cplx(0.0, -0.5)}};
  for (const Src& s : srcs) {
    cplx w = t.v * s.w;
    // Output entry (out_r,out_c) with complex weight w, embedded.
    out.push_back({t.out_r, t.out_c, s.r, s.c, w.real()});
    out.push_back({t.out_r + d, t.out_c + d, s.r, s.c, w.real()});
    out.push_back({t.out_r + d, t.out_c, s.r, s.c, w.imag()});
    out.push_back({t.out_r, t.out_c + d, s.r, s.c, -w.imag()});
  }
}

RealProblem realize(const ConicProblem& p) {
  RealProblem rp;
  rp.sign = p.sense == Sense::Min ? 1.0 : -1.0;
  rp.embedded = !data_is_real(p);
  const int nv = static_cast<int>(p.vars.size());
  auto conv = [&](const Mat& m) {
    return rp.embedded ? RMat(0.5 * embed_complex(0.5 * (m + m.adjoint())))
                       : herm_real(m);
  };
  for (const auto& v : p.vars) {
    rp.dims.push_back(rp.embedded ? 2 * v.dim : v.dim);
    rp.caps.push_back(rp.embedded ? 2 * v.trace_cap : v.trace_cap);
  }
  rp.C.resize(nv);
  for (int k = 0; k < nv; ++k)
    rp.C[k] = RMat::Zero(rp.dims[k], rp.dims[k]);
  for (const auto& t : p.objective) rp.C[t.var] += rp.sign * conv(t.coeff);

  for (const auto& s : p.scalars) {
    for (double flip : {1.0, -1.0}) {
      if ((s.rel == Rel::Le || s.rel == Rel::Eq) && flip < 0) continue;
      if (s.rel == Rel::Ge && flip > 0) continue;
      RealProblem::Scalar rs;
      rs.is_eq = s.rel == Rel::Eq;
      rs.rhs = flip * s.rhs;
      std::map<int, RMat> acc;
      for (const auto& t : s.terms) {
        auto [it, fresh] = acc.try_emplace(
            t.var, RMat::Zero(rp.dims[t.var], rp.dims[t.var]));
        it->second += flip * conv(t.coeff);
      }
      for (auto& [var, m] : acc) rs.terms.emplace_back(var, std::move(m));
      rp.scal.push_back(std::move(rs));
    }
  }

  for (const auto& l : p.lmis) {
    RealProblem::Lmi rl;
    rl.dim = rp.embedded ? 2 * l.dim : l.dim;
    rl.rhs = rp.embedded ? RMat(embed_complex(0.5 * (l.rhs + l.rhs.adjoint())))
                         : herm_real(l.rhs);
    for (const auto& m : l.maps) {
      std::vector<RealTriplet> trips;
      for (const auto& t : m.triplets) {
        if (rp.embedded) {
          expand_triplet(t, p.vars[m.var].dim, l.dim, trips);
        } else {
          trips.push_back({t.out_r, t.out_c, t.in_r, t.in_c, t.v.real()});
        }
      }
      rl.maps.emplace_back(m.var, std::move(trips));
    }
    rp.lmis.push_back(std::move(rl));
  }
  return rp;
}

int svec_dim(int q) { return q * (q + 1) / 2; }

int svec_index(int r, int c, int q) {
  // Column-major upper triangle: (0,0), (0,1), (1,1), (0,2), ...
  if (r > c) std::swap(r, c);
  (void)q;
  return c * (c + 1) / 2 + r;
}

// Adjoint of an LMI map evaluated on a symmetric matrix Z, symmetrised.
RMat lmi_adjoint(const std::vector<RealTriplet>& trips, const RMat& z,
                 int var_dim) {
  RMat m = RMat::Zero(var_dim, var_dim);
  for (const auto& t : trips) {
    double w = t.v * z(t.out_r, t.out_c);
    m(t.in_r, t.in_c) += 0.5 * w;
    m(t.in_c, t.in_r) += 0.5 * w;
  }
  return m;
}

struct Lowering {
  ConeLpRequest req;
  int n_y = 0;                    // scalar duals
  std::vector<int> z_offset;      // x-offset of each LMI multiplier svec
  std::vector<int> var_cone_row;  // h/z row offset of each variable cone
};

Lowering lower(const RealProblem& rp) {
  Lowering lo;
  const int n_y = static_cast<int>(rp.scal.size());
  lo.n_y = n_y;
  int n = n_y;
  for (const auto& l : rp.lmis) {
    lo.z_offset.push_back(n);
    n += svec_dim(l.dim);
  }
  lo.req.c.assign(n, 0.0);
  for (int i = 0; i < n_y; ++i) lo.req.c[i] = rp.scal[i].rhs;
  for (size_t m = 0; m < rp.lmis.size(); ++m) {
    const auto& l = rp.lmis[m];
    for (int c = 0; c < l.dim; ++c)
      for (int r = 0; r <= c; ++r)
        lo.req.c[lo.z_offset[m] + svec_index(r, c, l.dim)] =
            (r == c ? 1.0 : std::sqrt(2.0)) * l.rhs(r, c);
  }

  std::map<std::pair<int, int>, double> g;  // (col, row) -> value
  auto add_g = [&](int row, int col, double v) {
    if (v != 0.0) g[{col, row}] += v;
  };

  // Nonnegativity of the inequality duals (equality duals stay free).
  int row = 0;
  for (int i = 0; i < n_y; ++i)
    if (!rp.scal[i].is_eq) add_g(row++, i, -1.0);
  lo.req.n_lin = row;

  // PSD cones for the LMI multipliers (full storage tied to the svec vars).
  for (size_t m = 0; m < rp.lmis.size(); ++m) {
    const int q = rp.lmis[m].dim;
    lo.req.psd_dims.push_back(q);
    for (int c = 0; c < q; ++c)
      for (int r = 0; r <= c; ++r) {
        int col = lo.z_offset[m] + svec_index(r, c, q);
        if (r == c) {
          add_g(row + c * q + r, col, -1.0);
        } else {
          add_g(row + c * q + r, col, -1.0 / std::sqrt(2.0));
          add_g(row + r * q + c, col, -1.0 / std::sqrt(2.0));
        }
      }
    row += q * q;
  }

  // PSD cones for the dual slacks S_k = C_k + sum_i y_i A_ik + sum_m L*(Z_m).
  lo.req.h.assign(row, 0.0);
  for (size_t k = 0; k < rp.dims.size(); ++k) {
    const int d = rp.dims[k];
    lo.var_cone_row.push_back(row);
    lo.req.psd_dims.push_back(d);
    lo.req.h.resize(row + d * d, 0.0);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) lo.req.h[row + c * d + r] = rp.C[k](r, c);
    for (int i = 0; i < n_y; ++i)
      for (const auto& [var, a] : rp.scal[i].terms)
        if (var == static_cast<int>(k))
          for (int c = 0; c < d; ++c)
            for (int r = 0; r < d; ++r) add_g(row + c * d + r, i, -a(r, c));
    for (size_t m = 0; m < rp.lmis.size(); ++m)
      for (const auto& [var, trips] : rp.lmis[m].maps)
        if (var == static_cast<int>(k))
          for (const auto& t : trips) {
            // Column of the multiplier entry sourcing output (out_r, out_c);
            // symmetrise the contribution to S_k.
            int col = lo.z_offset[m] +
                      svec_index(t.out_r, t.out_c, rp.lmis[m].dim);
            double s = t.out_r == t.out_c ? 1.0 : 1.0 / std::sqrt(2.0);
            double w = t.v * s;
            add_g(row + t.in_c * d + t.in_r, col, -0.5 * w);
            add_g(row + t.in_r * d + t.in_c, col, -0.5 * w);
          }
    row += d * d;
  }

  for (const auto& [key, v] : g) {
    lo.req.g_cols.push_back(key.first);
    lo.req.g_rows.push_back(key.second);
    lo.req.g_vals.push_back(v);
  }
  return lo;
}

}  // namespace

struct SolverSession::Impl {
  detail::BridgeProcess proc;
};

SolverSession::SolverSession() : impl_(std::make_unique<Impl>()) {}
SolverSession::~SolverSession() = default;

SolveResult SolverSession::solve(const ConicProblem& p) {
  RealProblem rp = realize(p);
  Lowering lo = lower(rp);
  ConeLpResponse resp = impl_->proc.call(lo.req);

  SolveResult res;
  res.detail = resp.status;
  if (resp.status.rfind("error", 0) == 0 ||
      resp.x.size() != lo.req.c.size()) {
    res.status = SolveResult::Status::Failed;
    return res;
  }
  if (resp.status == "dual infeasible") {
    res.status = SolveResult::Status::Infeasible;
    return res;
  }
  if (resp.status == "primal infeasible") {
    // The dual is unbounded: the original problem admits no finite optimum.
    res.status = SolveResult::Status::Failed;
    return res;
  }
  res.status = resp.status == "optimal" ? SolveResult::Status::Optimal
                                        : SolveResult::Status::NumericalTrouble;

  const int n_y = lo.n_y;
  // Certified dual bound: clamp the scalar duals, project the multipliers,
  // then price any remaining slack infeasibility against the trace caps.
  std::vector<double> y(n_y);
  for (int i = 0; i < n_y; ++i)
    y[i] = rp.scal[i].is_eq ? resp.x[i] : std::max(0.0, resp.x[i]);
  double dual_obj = 0.0;
  for (int i = 0; i < n_y; ++i) dual_obj += y[i] * rp.scal[i].rhs;
  std::vector<RMat> zmat;
  for (size_t m = 0; m < rp.lmis.size(); ++m) {
    const int q = rp.lmis[m].dim;
    RMat z(q, q);
    for (int c = 0; c < q; ++c)
      for (int r = 0; r <= c; ++r) {
        double v = resp.x[lo.z_offset[m] + svec_index(r, c, q)];
        if (r != c) v /= std::sqrt(2.0);
        z(r, c) = z(c, r) = v;
      }
    z = psd_clip(z.cast<cplx>()).real();
    dual_obj += (rp.lmis[m].rhs.transpose() * z).trace();
    zmat.push_back(std::move(z));
  }
  double slack_penalty = 0.0;
  for (size_t k = 0; k < rp.dims.size(); ++k) {
    const int d = rp.dims[k];
    RMat s = rp.C[k];
    for (int i = 0; i < n_y; ++i)
      for (const auto& [var, a] : rp.scal[i].terms)
        if (var == static_cast<int>(k)) s += y[i] * a;
    for (size_t m = 0; m < rp.lmis.size(); ++m)
      for (const auto& [var, trips] : rp.lmis[m].maps)
        if (var == static_cast<int>(k)) s += lmi_adjoint(trips, zmat[m], d);
    Eigen::SelfAdjointEigenSolver<RMat> es(s);
    double lam_min = es.eigenvalues()(0);
    if (lam_min < 0.0) slack_penalty += -lam_min * rp.caps[k];
  }
  double certified_min = -dual_obj - slack_penalty;
  res.certified_value = rp.sign * certified_min;
  res.solver_dual = rp.sign * -dual_obj;

  // Recover the primal variables from the cone duals of the slack cones.
  for (size_t k = 0; k < rp.dims.size(); ++k) {
    const int d = rp.dims[k];
    RMat x(d, d);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r)
        x(r, c) = resp.z[lo.var_cone_row[k] + c * d + r];
    x = 0.5 * (x + x.transpose());
    Mat xc = rp.embedded ? unembed_complex(x) : Mat(x.cast<cplx>());
    res.primal.push_back(psd_clip(xc));
  }
  double obj = 0.0;
  for (const auto& t : p.objective)
    obj += (t.coeff * res.primal[t.var]).trace().real();
  res.primal_value = obj;
  res.gap = std::abs(res.primal_value - res.certified_value) /
            std::max(1.0, std::abs(res.primal_value));
  max_gap_ = std::max(max_gap_, res.gap);
  ++solve_count_;
  return res;
}

}  // namespace qkd
