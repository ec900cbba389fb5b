// ilradmm: solve / deblur / verify front end.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ilradmm/baselines.hpp"
#include "ilradmm/config.hpp"
#include "ilradmm/deblur.hpp"
#include "ilradmm/diagnostics.hpp"
#include "ilradmm/instances.hpp"
#include "ilradmm/trace_io.hpp"
#include "ilradmm/verify.hpp"

namespace {

using namespace ilradmm;

// Flags that were given on the command line win over the config file.
struct Overrides {
  KeyValueConfig kv;
  std::vector<std::pair<CLI::Option*, std::string>> bound;
  std::vector<std::string> values;

  void add(CLI::App& app, const std::string& flag, const std::string& key,
           const std::string& help) {
    values.emplace_back();
    bound.emplace_back(app.add_option(flag, values.back(), help), key);
  }
  void reserve(size_t n) { values.reserve(n); }

  void apply() {
    for (size_t i = 0; i < bound.size(); ++i)
      if (bound[i].first->count() > 0) kv.set(bound[i].second, values[i]);
  }
};

void print_vector(std::ostream& os, const char* name, const Vector& v) {
  os << name << "=";
  for (long i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_number(v[i]);
  os << "\n";
}

int run_solve(const std::string& config_path, Overrides& ov) {
  KeyValueConfig kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
  ov.apply();
  for (const auto& [k, v] : ov.kv.entries()) kv.set(k, v);

  Instance inst = instance_from_config(kv);
  const ProblemSpec& pr = inst.problem;
  BaselineConfig cfg;
  cfg.alpha0 = kv.get_double("alpha0", cfg.alpha0);
  cfg.rho = kv.get_double("rho", cfg.rho);
  cfg.alpha_max = kv.get_double("alpha-max", cfg.alpha_max);
  cfg.r_margin = kv.get_double("r-margin", cfg.r_margin);
  cfg.max_iter = static_cast<int>(kv.get_long("max-iter", cfg.max_iter));
  cfg.primal_tol = cfg.step_tol = kv.get_double("tol", 0.0);
  cfg.inner_iters = static_cast<int>(kv.get_long("inner-iters", cfg.inner_iters));
  const AlgorithmKind algo = algorithm_kind_from_string(kv.get_string("algo", "ilr"));
  const std::string x0 = kv.get_string("x0", "zero");
  const std::string trace_path = kv.get_string("trace", "");
  const std::string out_path = kv.get_string("out", "");
  cfg.validate();
  for (const std::string& k : kv.unused_keys())
    std::fprintf(stderr, "warning: unused config key '%s'\n", k.c_str());

  std::optional<SolverState> start;
  if (x0 == "least-squares") {
    IlrAdmm seeder(pr, cfg);
    start = seeder.initial_state(least_squares_minimizer(pr));
  } else if (x0 != "zero") {
    throw ParameterError("x0 must be zero or least-squares");
  }
  const RunResult r = run_algorithm(algo, pr, cfg, {}, start);
  if (!trace_path.empty()) emit_csv(r.trace, trace_path);

  const DiagnosticsConstants k = constants_for(pr, cfg);
  const SolverState& s = r.state;
  std::ostringstream os;
  os << "algo=" << to_string(algo) << "\n"
     << "iterations=" << r.trace.size() << "\n"
     << "converged=" << (r.converged ? 1 : 0) << "\n"
     << "primal_residual=" << format_number(pr.constraints.residual(s.x, s.y).norm()) << "\n"
     << "kkt=" << format_number(kkt_residual(s.x, s.y, s.p, pr).value()) << "\n"
     << "objective=" << format_number(pr.loss.value(s.x) + penalty_value(pr.outer, pr.inner, s.y))
     << "\n"
     << "theta=" << format_number(k.theta) << "\n"
     << "eta=" << format_number(k.eta) << "\n"
     << "nu=" << format_number(k.nu.value_or(kNaN)) << "\n"
     << "tau_hat=" << format_number(r.tau_hat) << "\n"
     << "elapsed_seconds=" << format_number(r.elapsed_seconds) << "\n";
  std::cout << os.str();
  std::cout << to_text(check_descent(r.trace, k.nu));
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw IoError("cannot open '" + out_path + "' for writing");
    print_vector(out, "x", s.x);
    print_vector(out, "y", s.y);
    print_vector(out, "p", s.p);
  }
  return 0;
}

int run_deblur_command(const std::string& config_path, Overrides& ov) {
  KeyValueConfig kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
  ov.apply();
  for (const auto& [k, v] : ov.kv.entries()) kv.set(k, v);
  if (kv.has("input") && kv.has("phantom"))
    throw ParameterError("deblur: give either --input or --phantom, not both");
  const ExperimentConfig cfg = experiment_config_from(kv, acceptance_deblur_config());
  for (const std::string& k : kv.unused_keys())
    std::fprintf(stderr, "warning: unused config key '%s'\n", k.c_str());
  const DeblurReport rep = run_deblur(cfg);
  for (const DeblurRun& r : rep.runs)
    std::printf("seed=%llu snr_degraded=%s snr_restored=%s iterations=%ld seconds=%s\n",
                static_cast<unsigned long long>(r.seed), format_number(r.snr_degraded).c_str(),
                format_number(r.snr_restored).c_str(), r.result.trace.size(),
                format_number(r.result.elapsed_seconds).c_str());
  if (rep.runs.size() > 1)
    std::printf("mean snr_degraded=%s snr_restored=%s\n",
                format_number(rep.mean_snr_degraded).c_str(),
                format_number(rep.mean_snr_restored).c_str());
  return 0;
}

int run_verify() {
  bool all = true;
  verify_all([&all](const CriterionResult& r) {
    all &= r.passed;
    std::printf("%s\n", format_criterion(r).c_str());
    std::fflush(stdout);
  });
  std::printf("verify: %s\n", all ? "all criteria passed" : "FAILED");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ILR-ADMM solver and deblurring experiments"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "solve an instance described by a key=value file");
  std::string solve_config;
  Overrides solve_ov;
  solve_ov.reserve(16);
  solve->add_option("config", solve_config, "instance/config file")->required();
  solve_ov.add(*solve, "--algo", "algo", "ilr, direct or inloop");
  solve_ov.add(*solve, "--max-iter", "max-iter", "iteration cap");
  solve_ov.add(*solve, "--tol", "tol", "primal and step tolerance (0 runs max-iter)");
  solve_ov.add(*solve, "--alpha0", "alpha0", "initial alpha");
  solve_ov.add(*solve, "--alpha-max", "alpha-max", "alpha cap");
  solve_ov.add(*solve, "--rho", "rho", "alpha growth factor");
  solve_ov.add(*solve, "--inner-iters", "inner-iters", "in-loop iterations");
  solve_ov.add(*solve, "--seed", "seed", "instance seed");
  solve_ov.add(*solve, "--trace", "trace", "CSV trace path");
  solve_ov.add(*solve, "--out", "out", "solution output path");
  std::vector<std::string> sets;
  solve->add_option("--set", sets, "extra key=value overrides");

  auto* deblur = app.add_subcommand("deblur", "TV^q deblurring experiment");
  std::string deblur_config;
  Overrides dov;
  dov.reserve(32);
  deblur->add_option("--config", deblur_config, "key=value file; flags override it");
  dov.add(*deblur, "--input", "input", "input PGM image");
  dov.add(*deblur, "--phantom", "phantom", "phantom size WxH");
  dov.add(*deblur, "--kernel-size", "kernel-size", "odd Gaussian kernel size");
  dov.add(*deblur, "--kernel-width", "kernel-width", "Gaussian kernel width");
  dov.add(*deblur, "--noise-std", "noise-std", "noise standard deviation");
  dov.add(*deblur, "--seed", "seed", "noise seed of the first repeat");
  dov.add(*deblur, "--q", "q", "exponent q in (0, 1]");
  dov.add(*deblur, "--epsilon", "epsilon", "smoothing epsilon");
  dov.add(*deblur, "--sigma-reg", "sigma-reg", "regularization weight");
  dov.add(*deblur, "--algo", "algo", "ilr, direct or inloop");
  dov.add(*deblur, "--inner-iters", "inner-iters", "in-loop iterations");
  dov.add(*deblur, "--alpha0", "alpha0", "initial alpha");
  dov.add(*deblur, "--rho", "rho", "alpha growth factor");
  dov.add(*deblur, "--alpha-max", "alpha-max", "alpha cap");
  dov.add(*deblur, "--max-iter", "max-iter", "iteration count");
  dov.add(*deblur, "--tol", "tol", "primal and step tolerance (0 runs max-iter)");
  dov.add(*deblur, "--repeats", "repeats", "noise realizations");
  dov.add(*deblur, "--trace", "trace", "CSV trace path");
  dov.add(*deblur, "--out", "out", "restored PGM path");

  app.add_subcommand("verify", "run the acceptance and diagnostics suite");

  CLI11_PARSE(app, argc, argv);
  try {
    if (solve->parsed()) {
      for (const std::string& s : sets) {
        const size_t eq = s.find('=');
        if (eq == std::string::npos) throw ParameterError("--set expects key=value");
        solve_ov.kv.set(s.substr(0, eq), s.substr(eq + 1));
      }
      return run_solve(solve_config, solve_ov);
    }
    if (deblur->parsed()) return run_deblur_command(deblur_config, dov);
    return run_verify();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
      std::fprintf(stderr, "  caused by: %s\n", inner.what());
    }
    return 2;
  }
}
