#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "ilradmm/operators.hpp"
#include "ilradmm/penalties.hpp"

namespace ilradmm {

// Convex loss f with L_f-Lipschitz gradient.
class SmoothLoss {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  SmoothLoss(long dim, ValueFn value, GradientFn gradient, double lipschitz);

  // f(x) = ||Psi x - b||^2 / 2, with L_f = ||Psi||_2^2.
  static SmoothLoss least_squares(LinearOperator psi, Vector b);

  long dim() const { return dim_; }
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  double lipschitz() const { return lipschitz_; }

  bool is_quadratic() const { return psi_.has_value(); }
  const LinearOperator& psi() const;
  const Vector& data() const;

 private:
  long dim_;
  ValueFn value_;
  GradientFn gradient_;
  double lipschitz_;
  std::optional<LinearOperator> psi_;
  Vector data_;
};

// min f(x) + sum_i g(h(y_i))  s.t.  A x + B y = c
struct ProblemSpec {
  SmoothLoss loss;
  ConstraintSystem constraints;
  ConcaveOuter outer;
  InnerConvex inner;
  // Strong-convexity modulus of f + ||A x||^2 / 2 when known.
  std::optional<double> delta;

  ProblemSpec(SmoothLoss loss, ConstraintSystem constraints, ConcaveOuter outer,
              InnerConvex inner, std::optional<double> delta = std::nullopt);

  long x_dim() const { return loss.dim(); }
  long y_dim() const { return constraints.b().in_dim(); }
  long c_dim() const { return constraints.c().size(); }
  const LinearOperator& a() const { return constraints.a(); }
  const LinearOperator& b() const { return constraints.b(); }
  const Vector& c() const { return constraints.c(); }
};

struct SolverConfig {
  double alpha0 = 1.0;
  double rho = 1.05;
  double alpha_max = 1e3;
  // r = alpha * ||B||^2 + r_margin
  double r_margin = 1e-6;
  int max_iter = 200;
  // Early exit once ||Ax+By-c|| <= primal_tol and ||z+ - z|| <= step_tol;
  // disabled while either is zero.
  double primal_tol = 0.0;
  double step_tol = 0.0;
  // Compute the x-subproblem gradient residual every this many iterations
  // (0 disables it).
  int residual_check_every = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SolverState {
  Vector x;
  Vector y;
  Vector p;
  double alpha = 1.0;
  double r = 1.0;
  long k = 0;
  WeightVector weights;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One row per executed iteration k -> k+1. `lagrangian` is L_alpha(d^{k+1})
// evaluated with the alpha used in that step.
struct TraceRow {
  long iter = 0;
  double alpha = kNaN;
  double r = kNaN;
  double lagrangian = kNaN;
  double primal_residual = kNaN;
  double step_x = kNaN;
  double step_y = kNaN;
  double dual_step = kNaN;
  double kkt = kNaN;
  double weight_min = kNaN;
  double weight_max = kNaN;
  double snr = kNaN;

  // In-memory only (not part of the CSV schema).
  double lagrangian_prev = kNaN;  // L_alpha(d^k) with the same alpha
  double dual_norm = kNaN;        // ||p^{k+1}||
  double grad_norm = kNaN;        // ||grad f(x^{k+1})||
  double x_residual = kNaN;       // x-subproblem gradient residual
  double x_norm = kNaN;           // ||x^{k+1}||
  double rel_error = kNaN;        // relative-error ratio (ILR-ADMM only)
  double x_member_gap = kNaN;     // disagreement of the two x-member routes
  double iterate_norm = kNaN;     // max(||x||, ||y||, ||p||) after the step
  long weights_clamped = 0;
};

struct IterateTrace {
  double initial_lagrangian = kNaN;  // L_{alpha_0}(d^0)
  std::vector<TraceRow> rows;

  long size() const { return static_cast<long>(rows.size()); }
  bool empty() const { return rows.empty(); }
};

}  // namespace ilradmm
