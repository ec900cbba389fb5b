#pragma once

#include <functional>
#include <optional>
#include <string>

#include "ilradmm/error.hpp"
#include "ilradmm/problem.hpp"
#include "ilradmm/xupdate.hpp"

namespace ilradmm {

// Non-finite iterate; carries the trace recorded up to (and including) the
// offending iteration.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long iteration, IterateTrace trace)
      : Error(what), iteration_(iteration), trace_(std::move(trace)) {}

  long iteration() const { return iteration_; }
  const IterateTrace& trace() const { return trace_; }

 private:
  long iteration_;
  IterateTrace trace_;
};

// Raised (with the original error nested) when a sub-step fails.
class IterationError : public Error {
 public:
  IterationError(long iteration, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

struct Schedule {
  double alpha;
  double r;
};

// alpha' = min(rho alpha, alpha_max), r' = alpha' ||B||^2 + r_margin
Schedule alpha_schedule(double alpha, const SolverConfig& config, double b_norm);

// One proximal-linearized weighted step on y, shared by ILR-ADMM and the
// in-loop baseline:
//   v_i <- prox_{(w_i/r) h}(v_i - B_i^T(alpha (A x + B v - c) + p) / r)
Vector linearized_weighted_prox(const ProblemSpec& problem, const Vector& x, const Vector& v,
                                const Vector& p, double alpha, double r,
                                const WeightVector& weights);

Vector y_update(const SolverState& state, const ProblemSpec& problem);
Vector x_update(const SolverState& state, const ProblemSpec& problem, const Vector& y_next);
// p + alpha * residual, with residual = A x+ + B y+ - c
Vector p_update(const Vector& p, double alpha, const Vector& residual);

// Called after every iteration with x^{k+1}; the returned value fills the
// snr column (NaN when not applicable).
using Observer = std::function<double(const Vector& x)>;

struct RunResult {
  SolverState state;
  IterateTrace trace;
  bool converged = false;   // stopped by the tolerance rule
  double tau_hat = kNaN;    // running max of the relative-error ratio
  double path_length = 0.0; // sum of ||z^{k+1} - z^k||
  double elapsed_seconds = 0.0;
  long weights_clamped = 0;
  XUpdater::Method x_method = XUpdater::Method::dense_cholesky;
};

// Shared driver for ILR-ADMM and the baselines. The variants differ only in
// how y^{k+1} is obtained; the x-, p- and schedule updates are common.
class AdmmSolver {
 public:
  AdmmSolver(const ProblemSpec& problem, SolverConfig config);
  virtual ~AdmmSolver();
  AdmmSolver(const AdmmSolver&) = delete;
  AdmmSolver& operator=(const AdmmSolver&) = delete;

  // x0 defaults to zero. y0 = (c - A x0) / s when B = s I, zero otherwise;
  // p0 = 0.
  SolverState initial_state(const std::optional<Vector>& x0 = std::nullopt) const;

  SolverState step(const SolverState& state);
  // Invoked by run() with every new iterate d^{k+1}.
  void on_iterate(std::function<void(const SolverState&)> callback) {
    on_iterate_ = std::move(callback);
  }
  RunResult run(const SolverState& start, const Observer& observer = {});
  RunResult run(const Observer& observer = {});

  const ProblemSpec& problem() const { return *problem_; }
  const SolverConfig& config() const { return config_; }
  double b_norm() const { return b_norm_; }
  const XUpdater& x_updater() const { return xupdate_; }

  virtual std::string name() const = 0;

 protected:
  virtual Vector y_step(const SolverState& state) = 0;
  virtual bool tracks_relative_error() const { return false; }

 private:
  struct Step;
  Step advance(const SolverState& state);

  const ProblemSpec* problem_;
  SolverConfig config_;
  double b_norm_;
  XUpdater xupdate_;
  std::function<void(const SolverState&)> on_iterate_;
};

class IlrAdmm : public AdmmSolver {
 public:
  using AdmmSolver::AdmmSolver;
  std::string name() const override { return "ilr"; }

 protected:
  Vector y_step(const SolverState& state) override { return y_update(state, problem()); }
  bool tracks_relative_error() const override { return true; }
};

RunResult run(const ProblemSpec& problem, const SolverConfig& config,
              const Observer& observer = {});

}  // namespace ilradmm
