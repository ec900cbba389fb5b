#include "ilradmm/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

#include "ilradmm/diagnostics.hpp"

namespace ilradmm {

Schedule alpha_schedule(double alpha, const SolverConfig& config, double b_norm) {
  const double next = std::min(config.rho * alpha, config.alpha_max);
  return {next, next * b_norm * b_norm + config.r_margin};
}

Vector linearized_weighted_prox(const ProblemSpec& problem, const Vector& x, const Vector& v,
                                const Vector& p, double alpha, double r,
                                const WeightVector& weights) {
  require_dim("y_update: len(y)", problem.y_dim(), v.size());
  require_dim("y_update: weights", problem.y_dim(), weights.size());
  if (!(r > 0)) throw ParameterError("y_update: r must be positive");
  const Vector res = problem.constraints.residual(x, v);
  const Vector shifted = v - problem.b().adjoint(alpha * res + p) / r;
  Vector out(v.size());
  for (long i = 0; i < v.size(); ++i)
    out[i] = prox_weighted_inner(problem.inner, weights.w[i], r, shifted[i]);
  return out;
}

Vector y_update(const SolverState& state, const ProblemSpec& problem) {
  return linearized_weighted_prox(problem, state.x, state.y, state.p, state.alpha, state.r,
                                  state.weights);
}

Vector x_update(const SolverState& state, const ProblemSpec& problem, const Vector& y_next) {
  XUpdater solver(problem);
  const Vector offset = problem.b().apply(y_next) - problem.c();
  return solver.solve(state.p, offset, state.alpha, state.x);
}

Vector p_update(const Vector& p, double alpha, const Vector& residual) {
  require_dim("p_update", p.size(), residual.size());
  return p + alpha * residual;
}

struct AdmmSolver::Step {
  SolverState next;
  Vector residual;
  Vector offset;
};

AdmmSolver::AdmmSolver(const ProblemSpec& problem, SolverConfig config)
    : problem_(&problem),
      config_(config),
      b_norm_(operator_norm(problem.b())),
      xupdate_(problem) {
  config_.validate();
}

AdmmSolver::~AdmmSolver() = default;

SolverState AdmmSolver::initial_state(const std::optional<Vector>& x0) const {
  const ProblemSpec& pr = *problem_;
  SolverState s;
  s.x = x0 ? *x0 : Vector::Zero(pr.x_dim());
  require_dim("initial_state: len(x0)", pr.x_dim(), s.x.size());
  if (pr.b().kind() == OperatorKind::scaled_identity && pr.b().identity_scale() != 0.0)
    s.y = (pr.c() - pr.a().apply(s.x)) / pr.b().identity_scale();
  else
    s.y = Vector::Zero(pr.y_dim());
  s.p = Vector::Zero(pr.c_dim());
  s.alpha = config_.alpha0;
  s.r = config_.alpha0 * b_norm_ * b_norm_ + config_.r_margin;
  s.k = 0;
  s.weights = compute_weights(pr.outer, pr.inner, s.y);
  return s;
}

AdmmSolver::Step AdmmSolver::advance(const SolverState& s) {
  const ProblemSpec& pr = *problem_;
  Step out;
  SolverState& n = out.next;
  n.y = y_step(s);
  out.offset = pr.b().apply(n.y) - pr.c();
  n.x = xupdate_.solve(s.p, out.offset, s.alpha, s.x);
  out.residual = pr.a().apply(n.x) + out.offset;
  n.p = p_update(s.p, s.alpha, out.residual);
  n.weights = compute_weights(pr.outer, pr.inner, n.y);
  const Schedule sched = alpha_schedule(s.alpha, config_, b_norm_);
  n.alpha = sched.alpha;
  n.r = sched.r;
  n.k = s.k + 1;
  return out;
}

SolverState AdmmSolver::step(const SolverState& state) {
  try {
    return advance(state).next;
  } catch (const Error& e) {
    std::throw_with_nested(IterationError(state.k, e.what()));
  }
}

namespace {

bool all_finite(const SolverState& s) {
  return s.x.allFinite() && s.y.allFinite() && s.p.allFinite();
}

}  // namespace

RunResult AdmmSolver::run(const Observer& observer) { return run(initial_state(), observer); }

RunResult AdmmSolver::run(const SolverState& start, const Observer& observer) {
  const ProblemSpec& pr = *problem_;
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  result.x_method = xupdate_.method();
  IterateTrace& trace = result.trace;
  SolverState s = start;
  trace.initial_lagrangian = lagrangian_value(s.x, s.y, s.p, pr, s.alpha);
  trace.rows.reserve(static_cast<size_t>(config_.max_iter));
  const bool early_stop = config_.primal_tol > 0 && config_.step_tol > 0;
  double tau = 0.0;

  for (int it = 0; it < config_.max_iter; ++it) {
    Step st;
    try {
      st = advance(s);
    } catch (const Error& e) {
      std::throw_with_nested(IterationError(s.k, e.what()));
    }
    SolverState& n = st.next;

    TraceRow row;
    row.iter = n.k;
    row.alpha = s.alpha;
    row.r = s.r;
    row.step_x = (n.x - s.x).norm();
    row.step_y = (n.y - s.y).norm();
    row.dual_step = (n.p - s.p).norm();
    row.primal_residual = st.residual.norm();
    row.weight_min = n.weights.min();
    row.weight_max = n.weights.max();
    row.weights_clamped = n.weights.clamped;
    result.weights_clamped += n.weights.clamped;

    if (!all_finite(n)) {
      trace.rows.push_back(row);
      throw DivergenceError("non-finite iterate at iteration " + std::to_string(n.k), n.k,
                            std::move(trace));
    }

    const Vector grad = pr.loss.gradient(n.x);
    const KktResidual kkt = kkt_residual(n.x, n.y, n.p, pr, n.weights);
    row.kkt = kkt.value();
    row.lagrangian = lagrangian_value(n.x, n.y, n.p, pr, s.alpha);
    row.lagrangian_prev = lagrangian_value(s.x, s.y, s.p, pr, s.alpha);
    row.dual_norm = n.p.norm();
    row.grad_norm = grad.norm();
    row.x_norm = n.x.norm();
    if (config_.residual_check_every > 0 && n.k % config_.residual_check_every == 0)
      row.x_residual = x_subproblem_residual(pr, n.x, s.p, st.offset, s.alpha);
    row.iterate_norm = std::max({n.x.norm(), n.y.norm(), n.p.norm()});
    if (tracks_relative_error()) {
      const RelativeError re = relative_error_ratio(s, n, pr);
      row.rel_error = re.ratio;
      row.x_member_gap = re.x_member_gap;
      if (std::isfinite(re.ratio)) tau = std::max(tau, re.ratio);
    }
    if (observer) row.snr = observer(n.x);
    trace.rows.push_back(row);
    if (on_iterate_) on_iterate_(n);

    const double dz = std::hypot(row.step_x, row.step_y);
    result.path_length += dz;
    s = std::move(n);
    if (early_stop && row.primal_residual <= config_.primal_tol && dz <= config_.step_tol) {
      result.converged = true;
      break;
    }
  }
  if (tracks_relative_error()) result.tau_hat = tau;
  result.state = std::move(s);
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

RunResult run(const ProblemSpec& problem, const SolverConfig& config, const Observer& observer) {
  IlrAdmm solver(problem, config);
  return solver.run(observer);
}

}  // namespace ilradmm
