#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ilradmm/baselines.hpp"
#include "ilradmm/config.hpp"
#include "ilradmm/image.hpp"

namespace ilradmm {

struct ExperimentConfig {
  std::string input;          // PGM path; empty means use the phantom
  long phantom_width = 64;
  long phantom_height = 64;
  std::uint64_t phantom_seed = 0;
  long kernel_size = 9;
  double kernel_width = 2.0;
  double noise_std = 0.01;
  std::uint64_t seed = 0;     // noise seed of the first repeat
  double q = 0.5;
  double epsilon = 1e-7;
  double sigma_reg = 1e-4;
  AlgorithmKind algo = AlgorithmKind::ilr;
  int inner_iters = 10;
  double alpha0 = 1.0;
  double rho = 1.05;
  double alpha_max = 1e3;
  double r_margin = 1e-6;
  int max_iter = 200;
  double tol = 0.0;           // primal and step tolerance; 0 runs max_iter
  int repeats = 1;
  int residual_check_every = 10;
  std::string trace;          // CSV path
  std::string out;            // restored PGM path

  void validate() const;
  BaselineConfig solver_config() const;
};

// Reads the keys mirroring the deblur flags (input, phantom, kernel-size,
// kernel-width, noise-std, seed, q, epsilon, sigma-reg, algo, inner-iters,
// alpha0, rho, alpha-max, max-iter, tol, repeats, trace, out); `phantom`
// takes WxH.
ExperimentConfig experiment_config_from(const KeyValueConfig& kv,
                                        ExperimentConfig base = ExperimentConfig{});

struct DeblurProblem {
  ImageBuffer original;
  ImageBuffer degraded;  // blurred, noisy, clamped
  ProblemSpec problem;
};

// f(u) = ||f0 - Psi u||^2 / 2 with Psi a periodic Gaussian blur, A = T
// (difference-2d), B = -I, c = 0, penalty sigma_reg (|.| + eps)^q.
DeblurProblem build_deblur_problem(const ExperimentConfig& config, const ImageBuffer& original,
                                   std::uint64_t noise_seed);

struct DeblurRun {
  std::uint64_t seed = 0;
  ImageBuffer restored;
  double snr_degraded = 0.0;
  double snr_restored = 0.0;
  RunResult result;
};

struct DeblurReport {
  ImageBuffer original;
  std::vector<DeblurRun> runs;
  // Mean of the per-iteration SNR column over repeats.
  std::vector<double> mean_snr;
  double mean_snr_degraded = 0.0;
  double mean_snr_restored = 0.0;
};

ImageBuffer experiment_image(const ExperimentConfig& config);

// Runs config.repeats seeded realizations (seeds seed .. seed+repeats-1)
// and writes the configured outputs. With one repeat the trace goes to
// `trace`; otherwise to <stem>.run<i>.csv plus <stem>.mean_snr.csv.
DeblurReport run_deblur(const ExperimentConfig& config);

std::string mean_snr_csv(const std::vector<double>& mean_snr);

}  // namespace ilradmm
