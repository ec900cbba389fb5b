#include "ilradmm/deblur.hpp"

#include <cmath>

#include "ilradmm/error.hpp"
#include "ilradmm/trace_io.hpp"

namespace ilradmm {

void ExperimentConfig::validate() const {
  if (!(q > 0 && q <= 1)) throw ParameterError("deblur: q must lie in (0, 1]");
  if (!(epsilon >= 0)) throw ParameterError("deblur: epsilon must be >= 0");
  if (!(sigma_reg >= 0)) throw ParameterError("deblur: sigma-reg must be >= 0");
  if (!(noise_std >= 0)) throw ParameterError("deblur: noise-std must be >= 0");
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw ParameterError("deblur: kernel-size must be odd and positive");
  if (!(kernel_width > 0)) throw ParameterError("deblur: kernel-width must be positive");
  if (repeats < 1) throw ParameterError("deblur: repeats must be >= 1");
  if (!(tol >= 0)) throw ParameterError("deblur: tol must be >= 0");
  if (input.empty() && (phantom_width < 16 || phantom_height < 16))
    throw ParameterError("deblur: phantom dimensions must be >= 16");
  if (epsilon == 0 && q < 1)
    throw ParameterError("deblur: epsilon = 0 with q < 1 makes the reweighting undefined at 0");
  solver_config().validate();
}

BaselineConfig ExperimentConfig::solver_config() const {
  BaselineConfig c;
  c.alpha0 = alpha0;
  c.rho = rho;
  c.alpha_max = alpha_max;
  c.r_margin = r_margin;
  c.max_iter = max_iter;
  c.primal_tol = tol;
  c.step_tol = tol;
  c.residual_check_every = residual_check_every;
  c.seed = seed;
  c.inner_iters = inner_iters;
  return c;
}

ExperimentConfig experiment_config_from(const KeyValueConfig& kv, ExperimentConfig c) {
  c.input = kv.get_string("input", c.input);
  if (const auto ph = kv.find("phantom")) {
    const size_t x = ph->find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument("no x");
      size_t used = 0;
      c.phantom_width = std::stol(ph->substr(0, x), &used);
      if (used != x) throw std::invalid_argument("width");
      const std::string hs = ph->substr(x + 1);
      c.phantom_height = std::stol(hs, &used);
      if (used != hs.size()) throw std::invalid_argument("height");
    } catch (const std::logic_error&) {
      throw ParameterError("deblur: phantom must be WxH, got '" + *ph + "'");
    }
  }
  c.phantom_seed = static_cast<std::uint64_t>(kv.get_long("phantom-seed", static_cast<long>(c.phantom_seed)));
  c.kernel_size = kv.get_long("kernel-size", c.kernel_size);
  c.kernel_width = kv.get_double("kernel-width", c.kernel_width);
  c.noise_std = kv.get_double("noise-std", c.noise_std);
  c.seed = static_cast<std::uint64_t>(kv.get_long("seed", static_cast<long>(c.seed)));
  c.q = kv.get_double("q", c.q);
  c.epsilon = kv.get_double("epsilon", c.epsilon);
  c.sigma_reg = kv.get_double("sigma-reg", c.sigma_reg);
  if (const auto a = kv.find("algo")) c.algo = algorithm_kind_from_string(*a);
  c.inner_iters = static_cast<int>(kv.get_long("inner-iters", c.inner_iters));
  c.alpha0 = kv.get_double("alpha0", c.alpha0);
  c.rho = kv.get_double("rho", c.rho);
  c.alpha_max = kv.get_double("alpha-max", c.alpha_max);
  c.r_margin = kv.get_double("r-margin", c.r_margin);
  c.max_iter = static_cast<int>(kv.get_long("max-iter", c.max_iter));
  c.tol = kv.get_double("tol", c.tol);
  c.repeats = static_cast<int>(kv.get_long("repeats", c.repeats));
  c.residual_check_every =
      static_cast<int>(kv.get_long("residual-check-every", c.residual_check_every));
  c.trace = kv.get_string("trace", c.trace);
  c.out = kv.get_string("out", c.out);
  return c;
}

ImageBuffer experiment_image(const ExperimentConfig& config) {
  if (!config.input.empty()) return load_pgm(config.input);
  return phantom_image(config.phantom_width, config.phantom_height, config.phantom_seed);
}

DeblurProblem build_deblur_problem(const ExperimentConfig& config, const ImageBuffer& original,
                                   std::uint64_t noise_seed) {
  const long rows = original.height, cols = original.width;
  if (config.kernel_size > rows || config.kernel_size > cols)
    throw ParameterError("deblur: kernel is larger than the image");
  LinearOperator psi = LinearOperator::convolution_2d(
      rows, cols, gaussian_kernel(config.kernel_size, config.kernel_width));
  ImageBuffer blurred(original.width, original.height, psi.apply(original.pixels));
  ImageBuffer degraded = add_noise(blurred, config.noise_std, noise_seed);
  degraded = clamp_image(degraded);
  LinearOperator t = LinearOperator::difference_2d(rows, cols);
  const long n_diff = t.out_dim();
  ConstraintSystem cs(std::move(t), LinearOperator::identity(n_diff, -1.0), Vector::Zero(n_diff));
  ProblemSpec problem(SmoothLoss::least_squares(std::move(psi), degraded.pixels), std::move(cs),
                      ConcaveOuter::power(config.q, config.epsilon, config.sigma_reg),
                      InnerConvex::abs());
  return {original, std::move(degraded), std::move(problem)};
}

std::string mean_snr_csv(const std::vector<double>& mean_snr) {
  std::string out = "iter,mean_snr\n";
  for (size_t i = 0; i < mean_snr.size(); ++i)
    out += std::to_string(i + 1) + "," + format_number(mean_snr[i]) + "\n";
  return out;
}

namespace {

std::string run_trace_path(const std::string& trace, int index) {
  const size_t dot = trace.rfind('.');
  const size_t slash = trace.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? trace.substr(0, dot) : trace;
  return stem + ".run" + std::to_string(index) + ".csv";
}

std::string mean_trace_path(const std::string& trace) {
  const size_t dot = trace.rfind('.');
  const size_t slash = trace.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? trace.substr(0, dot) : trace) + ".mean_snr.csv";
}

}  // namespace

DeblurReport run_deblur(const ExperimentConfig& config) {
  config.validate();
  DeblurReport report;
  report.original = experiment_image(config);
  const BaselineConfig solver_cfg = config.solver_config();

  for (int rep = 0; rep < config.repeats; ++rep) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(rep);
    DeblurProblem dp = build_deblur_problem(config, report.original, seed);
    const Vector& truth = report.original.pixels;
    Observer observer = [&truth](const Vector& x) { return snr(truth, x); };

    // x0 is the degraded observation; y0 = T x0, p0 = 0.
    IlrAdmm seeder(dp.problem, solver_cfg);
    const SolverState start = seeder.initial_state(dp.degraded.pixels);

    DeblurRun run;
    run.seed = seed;
    run.result = run_algorithm(config.algo, dp.problem, solver_cfg, observer, start);
    run.restored = ImageBuffer(report.original.width, report.original.height,
                               run.result.state.x);
    run.snr_degraded = snr(report.original, dp.degraded);
    run.snr_restored = snr(report.original, run.restored);
    report.runs.push_back(std::move(run));
  }

  const size_t iters = report.runs.front().result.trace.rows.size();
  report.mean_snr.assign(iters, 0.0);
  for (const DeblurRun& r : report.runs) {
    report.mean_snr_degraded += r.snr_degraded / config.repeats;
    report.mean_snr_restored += r.snr_restored / config.repeats;
    for (size_t i = 0; i < iters && i < r.result.trace.rows.size(); ++i)
      report.mean_snr[i] += r.result.trace.rows[i].snr / config.repeats;
  }

  if (!config.trace.empty()) {
    if (config.repeats == 1) {
      emit_csv(report.runs.front().result.trace, config.trace);
    } else {
      for (int rep = 0; rep < config.repeats; ++rep)
        emit_csv(report.runs[static_cast<size_t>(rep)].result.trace,
                 run_trace_path(config.trace, rep));
      write_text_file(mean_trace_path(config.trace), mean_snr_csv(report.mean_snr));
    }
  }
  if (!config.out.empty()) save_pgm(clamp_image(report.runs.front().restored), config.out);
  return report;
}

}  // namespace ilradmm
