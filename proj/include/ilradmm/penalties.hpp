#pragma once

#include <optional>
#include <string>

#include "ilradmm/operators.hpp"

namespace ilradmm {

enum class OuterKind { power, log, etp, geman, laplace };

std::string to_string(OuterKind kind);
OuterKind outer_kind_from_string(const std::string& name);

// Concave, nondecreasing outer function g = scale * g~ on [0, inf).
//
//   power    g~(s) = (s + eps)^q                     q in (0, 1], eps >= 0
//   log      g~(s) = log(1 + s / eps)                eps > 0
//   etp      g~(s) = (1 - exp(-gamma s)) / (1 - exp(-gamma))
//   geman    g~(s) = s / (s + gamma)
//   laplace  g~(s) = 1 - exp(-s / gamma)
struct ConcaveOuter {
  OuterKind kind = OuterKind::power;
  double q = 1.0;
  double epsilon = 0.0;
  double shape = 1.0;  // gamma for etp / geman / laplace
  double scale = 1.0;  // sigma

  static ConcaveOuter power(double q, double epsilon, double scale = 1.0);
  static ConcaveOuter log(double epsilon, double scale = 1.0);
  static ConcaveOuter etp(double gamma, double scale = 1.0);
  static ConcaveOuter geman(double gamma, double scale = 1.0);
  static ConcaveOuter laplace(double gamma, double scale = 1.0);

  // Lipschitz modulus of g' on [0, inf); only known in closed form for the
  // power kind with eps > 0: scale * q (1 - q) eps^(q - 2).
  std::optional<double> lipschitz_constant() const;
};

enum class InnerKind { abs, square };

std::string to_string(InnerKind kind);
InnerKind inner_kind_from_string(const std::string& name);

struct InnerConvex {
  InnerKind kind = InnerKind::abs;

  static InnerConvex abs() { return {InnerKind::abs}; }
  static InnerConvex square() { return {InnerKind::square}; }
};

double inner_value(const InnerConvex& h, double t);

// sigma * g~(s). Throws DomainError for s < 0.
double outer_value(const ConcaveOuter& g, double s);
// sigma * g~'(s). The power kind with eps = 0 is not differentiable at 0.
double outer_derivative(const ConcaveOuter& g, double s);
double outer_second_derivative(const ConcaveOuter& g, double s);

// sum_i g(h(y_i))
double penalty_value(const ConcaveOuter& g, const InnerConvex& h, const Vector& y);

// Reweighting map w_i = g'(h(y_i)). Entries that underflow below 1e-300 are
// clamped to 1e-300 and counted in `clamped`.
struct WeightVector {
  Vector w;
  long clamped = 0;

  long size() const { return w.size(); }
  double min() const { return w.size() ? w.minCoeff() : 0.0; }
  double max() const { return w.size() ? w.maxCoeff() : 0.0; }
};

inline constexpr double kWeightFloor = 1e-300;

WeightVector compute_weights(const ConcaveOuter& g, const InnerConvex& h, const Vector& y);

// argmin_t (w / r) h(t) + (t - v)^2 / 2
double prox_weighted_inner(const InnerConvex& h, double w, double r, double v);

// Global minimizer of t -> g(h(t)) + (alpha / 2)(t - z)^2. Candidates are
// t = 0 and the stationary points of the smooth branch with the sign of z;
// a tie goes to the smaller |t|.
double scalar_prox_composite(const ConcaveOuter& g, const InnerConvex& h, double alpha,
                             double z);

}  // namespace ilradmm
