#include "ilradmm/baselines.hpp"

#include <memory>

namespace ilradmm {

void BaselineConfig::validate() const {
  SolverConfig::validate();
  if (inner_iters < 1) throw ParameterError("BaselineConfig: inner_iters must be >= 1");
}

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::ilr: return "ilr";
    case AlgorithmKind::direct: return "direct";
    case AlgorithmKind::inloop: return "inloop";
  }
  return "unknown";
}

AlgorithmKind algorithm_kind_from_string(const std::string& name) {
  if (name == "ilr") return AlgorithmKind::ilr;
  if (name == "direct") return AlgorithmKind::direct;
  if (name == "inloop") return AlgorithmKind::inloop;
  throw ParameterError("unknown algorithm '" + name + "' (expected ilr, direct or inloop)");
}

double v_subproblem_objective(const ProblemSpec& problem, const Vector& x, const Vector& v,
                              const Vector& p, double alpha) {
  const Vector res = problem.constraints.residual(x, v);
  return penalty_value(problem.outer, problem.inner, v) + p.dot(problem.b().apply(v)) +
         0.5 * alpha * res.squaredNorm();
}

namespace {

double require_scaled_identity_b(const ProblemSpec& problem) {
  const LinearOperator& b = problem.b();
  if (b.kind() != OperatorKind::scaled_identity || b.identity_scale() == 0.0)
    throw ParameterError("direct ADMM requires B = s I with s != 0");
  return b.identity_scale();
}

}  // namespace

Vector direct_v_update(const ProblemSpec& problem, const Vector& x, const Vector& p,
                       double alpha) {
  const double s = require_scaled_identity_b(problem);
  require_dim("direct_v_update: len(p)", problem.c_dim(), p.size());
  // alpha/2 ||Ax + s v - c||^2 + <p, s v> = (alpha s^2 / 2) ||v - z||^2 + const
  const Vector z = (problem.c() - problem.a().apply(x) - p / alpha) / s;
  const double curvature = alpha * s * s;
  Vector v(z.size());
  for (long i = 0; i < z.size(); ++i)
    v[i] = scalar_prox_composite(problem.outer, problem.inner, curvature, z[i]);
  return v;
}

Vector inloop_v_update(const ProblemSpec& problem, const Vector& x, const Vector& y,
                       const Vector& p, double alpha, double r, int inner_iters,
                       std::vector<double>* objective_log) {
  if (inner_iters < 1) throw ParameterError("inloop_v_update: inner_iters must be >= 1");
  Vector v = y;
  if (objective_log) objective_log->push_back(v_subproblem_objective(problem, x, v, p, alpha));
  for (int j = 0; j < inner_iters; ++j) {
    const WeightVector w = compute_weights(problem.outer, problem.inner, v);
    v = linearized_weighted_prox(problem, x, v, p, alpha, r, w);
    if (objective_log) objective_log->push_back(v_subproblem_objective(problem, x, v, p, alpha));
  }
  return v;
}

DirectAdmm::DirectAdmm(const ProblemSpec& problem, SolverConfig config)
    : AdmmSolver(problem, config) {
  require_scaled_identity_b(problem);
}

Vector DirectAdmm::y_step(const SolverState& state) {
  return direct_v_update(problem(), state.x, state.p, state.alpha);
}

InloopAdmm::InloopAdmm(const ProblemSpec& problem, const BaselineConfig& config)
    : AdmmSolver(problem, config), inner_iters_(config.inner_iters) {
  config.validate();
}

Vector InloopAdmm::y_step(const SolverState& state) {
  return inloop_v_update(problem(), state.x, state.y, state.p, state.alpha, state.r,
                         inner_iters_);
}

SolverState direct_admm_step(const SolverState& state, const ProblemSpec& problem,
                             const SolverConfig& config) {
  DirectAdmm solver(problem, config);
  return solver.step(state);
}

SolverState inloop_admm_step(const SolverState& state, const ProblemSpec& problem,
                             const BaselineConfig& config) {
  InloopAdmm solver(problem, config);
  return solver.step(state);
}

RunResult run_algorithm(AlgorithmKind kind, const ProblemSpec& problem,
                        const BaselineConfig& config, const Observer& observer,
                        const std::optional<SolverState>& start) {
  config.validate();
  std::unique_ptr<AdmmSolver> solver;
  switch (kind) {
    case AlgorithmKind::ilr: solver = std::make_unique<IlrAdmm>(problem, config); break;
    case AlgorithmKind::direct: solver = std::make_unique<DirectAdmm>(problem, config); break;
    case AlgorithmKind::inloop: solver = std::make_unique<InloopAdmm>(problem, config); break;
  }
  return start ? solver->run(*start, observer) : solver->run(observer);
}

RunResult run_baseline(AlgorithmKind kind, const ProblemSpec& problem,
                       const BaselineConfig& config, const Observer& observer) {
  if (kind == AlgorithmKind::ilr) throw ParameterError("run_baseline: expected direct or inloop");
  return run_algorithm(kind, problem, config, observer);
}

}  // namespace ilradmm
