#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ilradmm/deblur.hpp"
#include "ilradmm/diagnostics.hpp"
#include "ilradmm/instances.hpp"

namespace ilradmm {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Dense seeded instance used by the descent / dual / criticality checks:
// M = N = 20, B = -I, c = 0, q = 0.5, eps = 1e-7, alpha fixed at alpha_max,
// started at x0 = argmin f.
struct CertificationRun {
  Instance instance;
  SolverConfig config;
  DiagnosticsConstants constants;
  CheckStatus p0_in_range = CheckStatus::unchecked;
  SolverState start;
  RunResult result;  // stopped by the 1e-10 primal/step tolerance
  RunResult full;    // every one of the max_iter iterations, no early stop
};

DenseInstanceParams certification_params(std::uint64_t seed = 7);
SolverConfig certification_config();
CertificationRun certification_run(std::uint64_t seed = 7);

CriterionResult verify_prox_oracle(std::uint64_t seed = 1);
CriterionResult verify_descent(const CertificationRun& run);
CriterionResult verify_dual_bound(const CertificationRun& run);
CriterionResult verify_criticality(const CertificationRun& run);
CriterionResult verify_relative_error(const CertificationRun& run);
// Gradient residual of the x-subproblem on every supplied trace.
CriterionResult verify_x_exactness(const std::vector<const IterateTrace*>& traces);

struct ConvexCollapse {
  CriterionResult criterion;
  std::vector<IterateTrace> traces;  // ilr, direct, inloop
};
ConvexCollapse verify_convex_collapse(std::uint64_t seed = 11, int iterations = 200);

struct DeblurCheck {
  CriterionResult criterion;
  std::string comparison;  // three-algorithm SNR report
  IterateTrace trace;
};
ExperimentConfig acceptance_deblur_config();
DeblurCheck verify_deblur(bool compare_algorithms = true);

CriterionResult verify_operators(std::uint64_t seed = 3);

// Runs criteria 1-9 in order; `on_result` is called after each one.
std::vector<CriterionResult> verify_all(
    const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_criterion(const CriterionResult& r);

}  // namespace ilradmm
