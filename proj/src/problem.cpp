#include "ilradmm/problem.hpp"

#include <cmath>

#include "ilradmm/error.hpp"

namespace ilradmm {

SmoothLoss::SmoothLoss(long dim, ValueFn value, GradientFn gradient, double lipschitz)
    : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)), lipschitz_(lipschitz) {
  if (dim <= 0) throw ParameterError("SmoothLoss: non-positive dimension");
  if (!value_ || !gradient_) throw ParameterError("SmoothLoss: missing value or gradient oracle");
  if (!(lipschitz >= 0) || !std::isfinite(lipschitz))
    throw ParameterError("SmoothLoss: Lipschitz constant must be finite and non-negative");
}

SmoothLoss SmoothLoss::least_squares(LinearOperator psi, Vector b) {
  require_dim("least_squares: len(b) vs Psi.out_dim", psi.out_dim(), b.size());
  const double norm = operator_norm(psi);
  auto value = [psi, b](const Vector& x) { return 0.5 * (psi.apply(x) - b).squaredNorm(); };
  auto gradient = [psi, b](const Vector& x) { return psi.adjoint(psi.apply(x) - b); };
  SmoothLoss loss(psi.in_dim(), value, gradient, norm * norm);
  loss.psi_ = std::move(psi);
  loss.data_ = std::move(b);
  return loss;
}

double SmoothLoss::value(const Vector& x) const {
  require_dim("SmoothLoss::value", dim_, x.size());
  return value_(x);
}

Vector SmoothLoss::gradient(const Vector& x) const {
  require_dim("SmoothLoss::gradient", dim_, x.size());
  return gradient_(x);
}

const LinearOperator& SmoothLoss::psi() const {
  if (!psi_) throw ParameterError("SmoothLoss: not a least-squares loss");
  return *psi_;
}

const Vector& SmoothLoss::data() const {
  if (!psi_) throw ParameterError("SmoothLoss: not a least-squares loss");
  return data_;
}

ProblemSpec::ProblemSpec(SmoothLoss loss_, ConstraintSystem constraints_, ConcaveOuter outer_,
                         InnerConvex inner_, std::optional<double> delta_)
    : loss(std::move(loss_)),
      constraints(std::move(constraints_)),
      outer(outer_),
      inner(inner_),
      delta(delta_) {
  require_dim("ProblemSpec: A.in_dim vs dim(x)", loss.dim(), constraints.a().in_dim());
  if (delta && !(*delta > 0)) throw ParameterError("ProblemSpec: delta must be positive");
}

void SolverConfig::validate() const {
  if (!(alpha0 > 0)) throw ParameterError("SolverConfig: alpha0 must be positive");
  if (!(rho >= 1)) throw ParameterError("SolverConfig: rho must be >= 1");
  if (!(alpha_max >= alpha0)) throw ParameterError("SolverConfig: alpha_max must be >= alpha0");
  if (!(r_margin > 0)) throw ParameterError("SolverConfig: r_margin must be positive");
  if (max_iter < 0) throw ParameterError("SolverConfig: max_iter must be non-negative");
  if (!(primal_tol >= 0) || !(step_tol >= 0))
    throw ParameterError("SolverConfig: tolerances must be non-negative");
  if (residual_check_every < 0)
    throw ParameterError("SolverConfig: residual_check_every must be non-negative");
}

}  // namespace ilradmm
