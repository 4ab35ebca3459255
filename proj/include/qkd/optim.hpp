#pragma once

// Conic optimisation layer: semidefinite programs over Hermitian PSD matrix
// variables with scalar linear constraints and linear matrix inequalities,
// lowered to a cone-program backend, with rigorous a-posteriori certification
// of every reported bound (dual feasibility is re-verified in exact matrix
// arithmetic here; any violation is charged against a-priori trace caps).

#include "qkd/fock.hpp"

#include <memory>
#include <string>
#include <vector>

namespace qkd {

// Hermitian PSD matrix variable.  `trace_cap` must be an upper bound on the
// trace of every feasible point, implied by the constraint set; it prices
// dual-infeasibility slack during certification.
struct MatrixVar {
  int dim = 1;
  double trace_cap = 1.0;
};

// One term of a linear functional: contributes Re Tr[coeff * X_var].
struct LinTerm {
  int var = 0;
  Mat coeff;
};

enum class Sense { Min, Max };
enum class Rel { Le, Ge, Eq };

struct ScalarConstraint {
  std::vector<LinTerm> terms;
  Rel rel = Rel::Le;
  double rhs = 0.0;
};

// Sparse superoperator triplet: output(out_r, out_c) += v * X(in_r, in_c).
struct LmiTriplet {
  int out_r, out_c, in_r, in_c;
  cplx v;
};

struct LmiMap {
  int var = 0;
  std::vector<LmiTriplet> triplets;
};

// sum_maps map(X_var) <= rhs in PSD order.
struct LmiConstraint {
  int dim = 0;
  std::vector<LmiMap> maps;
  Mat rhs;
};

struct ConicProblem {
  std::vector<MatrixVar> vars;
  Sense sense = Sense::Min;
  std::vector<LinTerm> objective;
  std::vector<ScalarConstraint> scalars;
  std::vector<LmiConstraint> lmis;

  int add_var(int dim, double trace_cap);
  void add_scalar(std::vector<LinTerm> terms, Rel rel, double rhs);
};

// Superoperator of the partial trace over the second factor: X on A(x)B
// (dims da, db) -> Tr_B X on A.
LmiMap lmi_partial_trace_b(int var, int da, int db);
// X -> s * X.
LmiMap lmi_scale(int var, double s, int dim);

// 2x2 real embedding of a complex Hermitian matrix: [[re, -im], [im, re]].
RMat embed_complex(const Mat& m);
// Inverse on the symmetric image (averages the two copies).
Mat unembed_complex(const RMat& y);

struct SolveResult {
  enum class Status { Optimal, NumericalTrouble, Infeasible, Failed };
  Status status = Status::Failed;
  double primal_value = 0.0;     // objective at the recovered primal point
  double solver_dual = 0.0;      // backend-reported dual objective
  double certified_value = 0.0;  // rigorous bound on the true optimum:
                                 // lower bound for Min, upper bound for Max
  double gap = 0.0;              // |primal - certified| / max(1, |primal|)
  std::vector<Mat> primal;       // recovered (PSD-projected) variables
  std::string detail;
};

// A persistent connection to the cone-program backend (one OS process).  Not
// thread safe; use one session per worker thread.
class SolverSession {
 public:
  SolverSession();
  ~SolverSession();
  SolverSession(const SolverSession&) = delete;
  SolverSession& operator=(const SolverSession&) = delete;

  SolveResult solve(const ConicProblem& p);

  // Worst relative duality gap and solve count since the last reset, over
  // every solve that produced a certificate.  Used to audit that all bounds
  // feeding a reported result were validated.
  double max_gap() const { return max_gap_; }
  long solve_count() const { return solve_count_; }
  void reset_stats() { max_gap_ = 0.0; solve_count_ = 0; }

 private:
  double max_gap_ = 0.0;
  long solve_count_ = 0;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Raw backend interface (used internally by SolverSession::solve; exposed for
// tests): cone LP  min c'x  s.t.  Gx + s = h,  s in R^l_+ x PSD(s[0]) x ...
struct ConeLpRequest {
  std::vector<double> c;
  std::vector<double> h;
  std::vector<int> g_rows, g_cols;
  std::vector<double> g_vals;
  int n_lin = 0;
  std::vector<int> psd_dims;
};
struct ConeLpResponse {
  std::string status;  // "optimal", "unknown", ...
  std::vector<double> x;
  std::vector<double> z;  // duals per cone row (full-storage for PSD cones)
};

}  // namespace qkd
