#pragma once

#include <string>
#include <vector>

#include "ilradmm/solver.hpp"

namespace ilradmm {

struct BaselineConfig : SolverConfig {
  int inner_iters = 10;

  void validate() const;
};

enum class AlgorithmKind { ilr, direct, inloop };
std::string to_string(AlgorithmKind kind);
AlgorithmKind algorithm_kind_from_string(const std::string& name);

// The exact v-subproblem objective
//   sum_i g(h(v_i)) + <p, B v> + (alpha/2) ||A x + B v - c||^2.
double v_subproblem_objective(const ProblemSpec& problem, const Vector& x, const Vector& v,
                              const Vector& p, double alpha);

// Entrywise global minimizer of the v-subproblem. Requires B = s I, s != 0.
Vector direct_v_update(const ProblemSpec& problem, const Vector& x, const Vector& p,
                       double alpha);

// inner_iters reweighted proximal-linearized steps started at v = y. The
// weights are refreshed from the current inner v before every step. If
// objective_log is given it receives the v-subproblem objective at the start
// and after each inner step.
Vector inloop_v_update(const ProblemSpec& problem, const Vector& x, const Vector& y,
                       const Vector& p, double alpha, double r, int inner_iters,
                       std::vector<double>* objective_log = nullptr);

// Direct nonconvex ADMM: exact scalar prox in the v-step.
class DirectAdmm : public AdmmSolver {
 public:
  DirectAdmm(const ProblemSpec& problem, SolverConfig config);
  std::string name() const override { return "direct"; }

 protected:
  Vector y_step(const SolverState& state) override;
};

// In-loop ADMM: the v-step is a fixed-length inner reweighting loop.
class InloopAdmm : public AdmmSolver {
 public:
  InloopAdmm(const ProblemSpec& problem, const BaselineConfig& config);
  std::string name() const override { return "inloop"; }
  int inner_iters() const { return inner_iters_; }

 protected:
  Vector y_step(const SolverState& state) override;

 private:
  int inner_iters_;
};

SolverState direct_admm_step(const SolverState& state, const ProblemSpec& problem,
                             const SolverConfig& config);
SolverState inloop_admm_step(const SolverState& state, const ProblemSpec& problem,
                             const BaselineConfig& config);

// Runs ILR-ADMM or one of the baselines from the default initial state (or
// `start` if given).
RunResult run_algorithm(AlgorithmKind kind, const ProblemSpec& problem,
                        const BaselineConfig& config, const Observer& observer = {},
                        const std::optional<SolverState>& start = std::nullopt);

RunResult run_baseline(AlgorithmKind kind, const ProblemSpec& problem,
                       const BaselineConfig& config, const Observer& observer = {});

}  // namespace ilradmm
