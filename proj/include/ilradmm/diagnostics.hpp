#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ilradmm/problem.hpp"

namespace ilradmm {

// L_alpha(x, y, p) = f(x) + sum_i g(h(y_i)) + <p, Ax+By-c> + (alpha/2)||Ax+By-c||^2
double lagrangian_value(const Vector& x, const Vector& y, const Vector& p,
                        const ProblemSpec& problem, double alpha);

// Distance of (x, y, p) from the critical-point relations
//   -B^T p in W dh(y),   -A^T p = grad f(x),   Ax + By - c = 0,
// with W = diag(g'(h(y_i))).
struct KktResidual {
  double y_stationarity = 0.0;
  double x_stationarity = 0.0;
  double feasibility = 0.0;
  double value() const;
};

KktResidual kkt_residual(const Vector& x, const Vector& y, const Vector& p,
                         const ProblemSpec& problem);
KktResidual kkt_residual(const Vector& x, const Vector& y, const Vector& p,
                         const ProblemSpec& problem, const WeightVector& weights);

// Ratio ||(y-member, x-member, p-member)|| / ||z^{k+1} - z^k|| built from the
// explicit subgradient members of dL_alpha(d^{k+1}) for one ILR-ADMM step
// taken with prev.alpha and prev.r. Zero at a fixed point.
struct RelativeError {
  double ratio = 0.0;
  double y_member = 0.0;
  double x_member = 0.0;
  double p_member = 0.0;
  // ||A^T(p+ - p) - (-grad f(x+) - A^T p)||: the x-member two ways.
  double x_member_gap = 0.0;
};

RelativeError relative_error_ratio(const SolverState& prev, const SolverState& next,
                                   const ProblemSpec& problem);

enum class CheckStatus { passed, violated, unchecked };
std::string to_string(CheckStatus status);

// Whether Im(B) u {c} is contained in Im(A), decided by comparing
// rank(A) with rank([A | B | c]). Unchecked beyond desk scale.
CheckStatus range_condition(const ProblemSpec& problem);
// Whether v lies in Im(A) (rank test, desk scale only).
CheckStatus in_range_of_a(const ProblemSpec& problem, const Vector& v);

struct DiagnosticsConstants {
  double theta = 0.0;      // smallest positive singular value of A
  double eta = 0.0;        // L_f^2 / theta^2
  double lipschitz = 0.0;  // L_f
  double a_norm = 0.0;
  double b_norm = 0.0;
  double alpha = 0.0;      // alpha at which nu is evaluated (alpha_max)
  double r = 0.0;
  std::optional<double> delta;
  std::optional<double> nu;
  // alpha > max{1, 2 eta / delta} and r > alpha ||B||^2; empty without delta.
  std::optional<bool> descent_condition;
  CheckStatus range = CheckStatus::unchecked;
};

// nu = min{delta/2 - eta/alpha, (r - alpha ||B||^2) / 2}
double descent_constant(double delta, double eta, double alpha, double r, double b_norm);

// Strong-convexity modulus of f + ||Ax||^2/2: the supplied value or, for a
// least-squares loss at desk scale, lambda_min(Psi^T Psi + A^T A).
std::optional<double> strong_convexity_modulus(const ProblemSpec& problem);

DiagnosticsConstants constants_for(const ProblemSpec& problem, const SolverConfig& config);

struct Violation {
  long index = 0;
  std::string kind;
  double observed = 0.0;
  double bound = 0.0;
};

struct CheckReport {
  std::string name;
  CheckStatus status = CheckStatus::unchecked;
  long checked = 0;
  std::vector<Violation> violations;
  std::string note;

  bool passed() const { return status == CheckStatus::passed; }
};

// Monotone descent, and if nu is given the quantified bound
// L_k - L_{k+1} >= nu ||dz||^2 - quantified_tol, over consecutive rows
// sharing the same alpha.
CheckReport check_descent(const IterateTrace& trace, std::optional<double> nu = std::nullopt,
                          double monotone_tol = 1e-10, double quantified_tol = 1e-8);

// ||p+ - p|| <= sqrt(eta) ||x+ - x|| (1 + 1e-8). Unchecked unless the range
// condition holds and p0 in Im(A) was verified.
CheckReport check_dual_bound(const IterateTrace& trace, const DiagnosticsConstants& constants,
                             CheckStatus p0_in_range);
// ||p^k|| <= ||grad f(x^k)|| / theta (1 + 1e-8), same preconditions.
CheckReport check_dual_boundedness(const IterateTrace& trace,
                                   const DiagnosticsConstants& constants,
                                   CheckStatus p0_in_range);

// Running max of the relative-error ratio (the empirical tau).
double tau_hat(const IterateTrace& trace);

// key=value lines: the trace column names summarized plus status flags.
std::string to_text(const CheckReport& report);

// Brute-force 1-D minimizer: exhaustive grid on [lo, hi] followed by
// golden-section refinement around the best grid point; a grid point wins
// ties against the refined point.
double grid_prox_oracle(const std::function<double(double)>& objective, double lo, double hi,
                        double step);

}  // namespace ilradmm
