#include "ilradmm/diagnostics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ilradmm/error.hpp"

namespace ilradmm {

double lagrangian_value(const Vector& x, const Vector& y, const Vector& p,
                        const ProblemSpec& problem, double alpha) {
  require_dim("lagrangian_value: len(p)", problem.c_dim(), p.size());
  const Vector res = problem.constraints.residual(x, y);
  return problem.loss.value(x) + penalty_value(problem.outer, problem.inner, y) + p.dot(res) +
         0.5 * alpha * res.squaredNorm();
}

double KktResidual::value() const {
  return std::max({y_stationarity, x_stationarity, feasibility});
}

KktResidual kkt_residual(const Vector& x, const Vector& y, const Vector& p,
                         const ProblemSpec& problem) {
  return kkt_residual(x, y, p, problem, compute_weights(problem.outer, problem.inner, y));
}

KktResidual kkt_residual(const Vector& x, const Vector& y, const Vector& p,
                         const ProblemSpec& problem, const WeightVector& weights) {
  require_dim("kkt_residual: len(p)", problem.c_dim(), p.size());
  require_dim("kkt_residual: weights", y.size(), weights.size());
  const Vector btp = problem.b().adjoint(p);
  double sq = 0.0;
  for (long i = 0; i < y.size(); ++i) {
    const double target = -btp[i];
    const double w = weights.w[i];
    double d;
    if (problem.inner.kind == InnerKind::abs) {
      d = y[i] == 0.0 ? std::max(0.0, std::abs(target) - w)
                      : std::abs(target - w * (y[i] > 0 ? 1.0 : -1.0));
    } else {
      d = std::abs(target - 2.0 * w * y[i]);
    }
    sq += d * d;
  }
  KktResidual out;
  out.y_stationarity = std::sqrt(sq);
  out.x_stationarity = (problem.loss.gradient(x) + problem.a().adjoint(p)).norm();
  out.feasibility = problem.constraints.residual(x, y).norm();
  return out;
}

RelativeError relative_error_ratio(const SolverState& prev, const SolverState& next,
                                   const ProblemSpec& problem) {
  const LinearOperator& a = problem.a();
  const LinearOperator& b = problem.b();
  const double alpha = prev.alpha;
  const double r = prev.r;
  require_dim("relative_error_ratio: prev weights", prev.y.size(), prev.weights.size());
  require_dim("relative_error_ratio: next weights", next.y.size(), next.weights.size());

  const Vector res_prev = problem.constraints.residual(prev.x, prev.y);
  const Vector res_next = problem.constraints.residual(next.x, next.y);

  // r(y^k - y^{k+1}) - B^T(alpha res^k + p^k) lies in W^k dh(y^{k+1}).
  const Vector inclusion = r * (prev.y - next.y) - b.adjoint(alpha * res_prev + prev.p);
  const Vector reweight = next.weights.w.cwiseQuotient(prev.weights.w);
  const Vector y_member = reweight.cwiseProduct(inclusion) + b.adjoint(next.p) +
                          alpha * b.adjoint(res_next);
  const Vector dp = next.p - prev.p;
  const Vector x_member = a.adjoint(dp);
  const Vector x_member_alt = -problem.loss.gradient(next.x) - a.adjoint(prev.p);
  const Vector p_member = dp / alpha;

  RelativeError out;
  out.y_member = y_member.norm();
  out.x_member = x_member.norm();
  out.p_member = p_member.norm();
  out.x_member_gap = (x_member - x_member_alt).norm();
  const double dz =
      std::sqrt((next.x - prev.x).squaredNorm() + (next.y - prev.y).squaredNorm());
  if (dz == 0.0) {
    out.ratio = 0.0;
    return out;
  }
  out.ratio = std::sqrt(out.y_member * out.y_member + out.x_member * out.x_member +
                        out.p_member * out.p_member) /
              dz;
  return out;
}

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::passed: return "passed";
    case CheckStatus::violated: return "violated";
    case CheckStatus::unchecked: return "unchecked";
  }
  return "unknown";
}

namespace {

constexpr long kRankTestEntries = 1L << 22;

bool rank_test_feasible(const ProblemSpec& problem) {
  const long cols = problem.x_dim() + problem.y_dim() + 1;
  return problem.c_dim() * cols <= kRankTestEntries;
}

}  // namespace

CheckStatus range_condition(const ProblemSpec& problem) {
  if (!rank_test_feasible(problem)) return CheckStatus::unchecked;
  const Matrix a = problem.a().to_dense();
  Matrix stacked(a.rows(), a.cols() + problem.y_dim() + 1);
  stacked << a, problem.b().to_dense(), problem.c();
  return numerical_rank(stacked) == numerical_rank(a) ? CheckStatus::passed
                                                      : CheckStatus::violated;
}

CheckStatus in_range_of_a(const ProblemSpec& problem, const Vector& v) {
  require_dim("in_range_of_a", problem.c_dim(), v.size());
  if (!rank_test_feasible(problem)) return CheckStatus::unchecked;
  if (v.norm() == 0.0) return CheckStatus::passed;
  const Matrix a = problem.a().to_dense();
  Matrix stacked(a.rows(), a.cols() + 1);
  stacked << a, v;
  return numerical_rank(stacked) == numerical_rank(a) ? CheckStatus::passed
                                                      : CheckStatus::violated;
}

double descent_constant(double delta, double eta, double alpha, double r, double b_norm) {
  return std::min(0.5 * delta - eta / alpha, 0.5 * (r - alpha * b_norm * b_norm));
}

std::optional<double> strong_convexity_modulus(const ProblemSpec& problem) {
  if (problem.delta) return problem.delta;
  if (!problem.loss.is_quadratic() || problem.x_dim() > kDeskScaleDim) return std::nullopt;
  const Matrix h = problem.loss.psi().gram() + problem.a().gram();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  const double lambda = es.eigenvalues()(0);
  if (!(lambda > 0)) return std::nullopt;
  return lambda;
}

DiagnosticsConstants constants_for(const ProblemSpec& problem, const SolverConfig& config) {
  config.validate();
  DiagnosticsConstants k;
  k.theta = smallest_positive_singular_value(problem.a());
  k.lipschitz = problem.loss.lipschitz();
  k.eta = k.lipschitz * k.lipschitz / (k.theta * k.theta);
  k.a_norm = operator_norm(problem.a());
  k.b_norm = operator_norm(problem.b());
  k.alpha = config.alpha_max;
  k.r = k.alpha * k.b_norm * k.b_norm + config.r_margin;
  k.delta = strong_convexity_modulus(problem);
  if (k.delta) {
    k.nu = descent_constant(*k.delta, k.eta, k.alpha, k.r, k.b_norm);
    k.descent_condition = k.alpha > std::max(1.0, 2.0 * k.eta / *k.delta) &&
                          k.r > k.alpha * k.b_norm * k.b_norm;
  }
  k.range = range_condition(problem);
  return k;
}

CheckReport check_descent(const IterateTrace& trace, std::optional<double> nu,
                          double monotone_tol, double quantified_tol) {
  CheckReport report;
  report.name = "descent";
  if (trace.empty()) {
    report.note = "empty trace";
    return report;
  }
  for (long k = 0; k < trace.size(); ++k) {
    const TraceRow& row = trace.rows[static_cast<size_t>(k)];
    double before;
    if (k == 0) {
      before = trace.initial_lagrangian;
    } else {
      const TraceRow& prev = trace.rows[static_cast<size_t>(k - 1)];
      if (prev.alpha != row.alpha) continue;
      before = prev.lagrangian;
    }
    if (!std::isfinite(before)) continue;
    ++report.checked;
    const double drop = before - row.lagrangian;
    const double mono_bound = -monotone_tol * (1.0 + std::abs(before));
    if (!(drop >= mono_bound)) report.violations.push_back({k, "increase", drop, mono_bound});
    if (nu) {
      const double dz2 = row.step_x * row.step_x + row.step_y * row.step_y;
      const double bound = *nu * dz2 - quantified_tol;
      if (!(drop >= bound)) report.violations.push_back({k, "quantified", drop, bound});
    }
  }
  if (report.checked == 0) {
    report.note = "no pair of consecutive iterations shares alpha";
    return report;
  }
  report.status = report.violations.empty() ? CheckStatus::passed : CheckStatus::violated;
  return report;
}

namespace {

bool dual_preconditions(const DiagnosticsConstants& constants, CheckStatus p0_in_range,
                        CheckReport& report) {
  if (constants.range != CheckStatus::passed) {
    report.note = "Im(B) u {c} within Im(A) is " + to_string(constants.range);
    return false;
  }
  if (p0_in_range != CheckStatus::passed) {
    report.note = "p0 in Im(A) is " + to_string(p0_in_range);
    return false;
  }
  return true;
}

}  // namespace

CheckReport check_dual_bound(const IterateTrace& trace, const DiagnosticsConstants& constants,
                             CheckStatus p0_in_range) {
  CheckReport report;
  report.name = "dual_bound";
  if (!dual_preconditions(constants, p0_in_range, report)) return report;
  const double factor = std::sqrt(constants.eta) * (1.0 + 1e-8);
  for (long k = 0; k < trace.size(); ++k) {
    const TraceRow& row = trace.rows[static_cast<size_t>(k)];
    ++report.checked;
    const double bound = factor * row.step_x;
    if (!(row.dual_step <= bound)) report.violations.push_back({k, "dual_step", row.dual_step, bound});
  }
  report.status = report.violations.empty() ? CheckStatus::passed : CheckStatus::violated;
  return report;
}

CheckReport check_dual_boundedness(const IterateTrace& trace,
                                   const DiagnosticsConstants& constants,
                                   CheckStatus p0_in_range) {
  CheckReport report;
  report.name = "dual_boundedness";
  if (!dual_preconditions(constants, p0_in_range, report)) return report;
  for (long k = 0; k < trace.size(); ++k) {
    const TraceRow& row = trace.rows[static_cast<size_t>(k)];
    ++report.checked;
    const double bound = row.grad_norm / constants.theta * (1.0 + 1e-8);
    if (!(row.dual_norm <= bound)) report.violations.push_back({k, "dual_norm", row.dual_norm, bound});
  }
  report.status = report.violations.empty() ? CheckStatus::passed : CheckStatus::violated;
  return report;
}

double tau_hat(const IterateTrace& trace) {
  double best = 0.0;
  for (const TraceRow& row : trace.rows)
    if (!std::isnan(row.rel_error)) best = std::max(best, row.rel_error);
  return best;
}

std::string to_text(const CheckReport& report) {
  std::ostringstream os;
  os.precision(12);
  os << "check=" << report.name << "\n"
     << "status=" << to_string(report.status) << "\n"
     << "pass=" << (report.passed() ? 1 : 0) << "\n"
     << "checked=" << report.checked << "\n"
     << "violations=" << report.violations.size() << "\n";
  if (!report.note.empty()) os << "note=" << report.note << "\n";
  const size_t shown = std::min<size_t>(report.violations.size(), 20);
  for (size_t i = 0; i < shown; ++i) {
    const Violation& v = report.violations[i];
    os << "violation." << i << "=iter:" << v.index << ",kind:" << v.kind
       << ",observed:" << v.observed << ",bound:" << v.bound << "\n";
  }
  return os.str();
}

double grid_prox_oracle(const std::function<double(double)>& objective, double lo, double hi,
                        double step) {
  if (!(step > 0)) throw ParameterError("grid_prox_oracle: step must be positive");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi))
    throw ParameterError("grid_prox_oracle: interval must be finite and ordered");
  // Grid points are integer multiples of step, so 0 is exact whenever it
  // lies in the interval.
  const long first = static_cast<long>(std::ceil(lo / step));
  const long last = static_cast<long>(std::floor(hi / step));
  double best_t = lo;
  double best_v = std::numeric_limits<double>::infinity();
  auto visit = [&](double t) {
    const double v = objective(t);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os.precision(17);
      os << "grid_prox_oracle: non-finite objective at t=" << t;
      throw DomainError(os.str());
    }
    if (v < best_v) {
      best_v = v;
      best_t = t;
    }
  };
  if (first > last) {
    visit(lo);
    visit(hi);
  }
  for (long i = first; i <= last; ++i) visit(static_cast<double>(i) * step);

  double a = std::max(lo, best_t - step);
  double b = std::min(hi, best_t + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(best_t)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  const double refined = 0.5 * (a + b);
  return objective(refined) < best_v ? refined : best_t;
}

}  // namespace ilradmm
