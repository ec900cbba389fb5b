#include "ilradmm/verify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "ilradmm/trace_io.hpp"

namespace ilradmm {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) { return format_number(v); }

}  // namespace

std::string format_criterion(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "criterion %d [%s] %s (%.2fs)", r.id,
                r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
  return std::string(head) + ": " + r.detail;
}

// ---------------------------------------------------------------- 1: prox

CriterionResult verify_prox_oracle(std::uint64_t seed) {
  const auto t0 = Clock::now();
  CriterionResult out{1, "prox oracle agreement", false, "", 0.0};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uv(-5.0, 5.0), uw(0.0, 5.0), ur(0.5, 10.0);
  std::uniform_real_distribution<double> usig(0.0, 3.0), ualpha(0.5, 10.0);
  constexpr int kCases = 1000;
  constexpr double kTol = 1e-3;

  double worst_inner = 0.0;
  int bad_inner = 0;
  for (int i = 0; i < kCases; ++i) {
    const double v = uv(rng), w = uw(rng), r = ur(rng);
    const InnerConvex h = (i % 2 == 0) ? InnerConvex::abs() : InnerConvex::square();
    auto objective = [&](double t) {
      const double ht = h.kind == InnerKind::abs ? std::abs(t) : t * t;
      return (w / r) * ht + 0.5 * (t - v) * (t - v);
    };
    const double oracle = grid_prox_oracle(objective, -6.0, 6.0, 1e-3);
    const double got = prox_weighted_inner(h, w, r, v);
    const double err = std::abs(got - oracle);
    worst_inner = std::max(worst_inner, err);
    if (!(err <= kTol)) ++bad_inner;
  }

  const double qs[] = {0.3, 0.5, 0.7};
  const double eps[] = {0.0, 1e-7};
  double worst_comp = 0.0;
  int bad_comp = 0;
  for (int i = 0; i < kCases; ++i) {
    const double sigma = usig(rng);
    const double q = qs[rng() % 3];
    const double e = eps[rng() % 2];
    const double alpha = ualpha(rng), z = uv(rng);
    auto objective = [&](double t) {
      return sigma * std::pow(std::abs(t) + e, q) + 0.5 * alpha * (t - z) * (t - z);
    };
    const double oracle = grid_prox_oracle(objective, -6.0, 6.0, 1e-3);
    const double got =
        scalar_prox_composite(ConcaveOuter::power(q, e, sigma), InnerConvex::abs(), alpha, z);
    const double err = std::abs(got - oracle);
    worst_comp = std::max(worst_comp, err);
    if (!(err <= kTol)) ++bad_comp;
  }

  out.seconds = seconds_since(t0);
  out.passed = bad_inner == 0 && bad_comp == 0 && out.seconds < 30.0;
  out.detail = "weighted-inner worst " + fmt(worst_inner) + " (" + std::to_string(bad_inner) +
               "/1000 over 1e-3), composite worst " + fmt(worst_comp) + " (" +
               std::to_string(bad_comp) + "/1000 over 1e-3)";
  return out;
}

// ------------------------------------------------------- certification run

DenseInstanceParams certification_params(std::uint64_t seed) {
  DenseInstanceParams p;
  p.n = 20;
  p.m = 20;
  p.seed = seed;
  p.outer = ConcaveOuter::power(0.5, 1e-7, 0.5);
  p.inner = InnerConvex::abs();
  return p;
}

SolverConfig certification_config() {
  SolverConfig c;
  c.alpha0 = 1e3;
  c.alpha_max = 1e3;
  c.rho = 1.05;
  c.r_margin = 1e-6;
  c.max_iter = 2000;
  // Stop before the iterates reach the rounding floor, where the dual and
  // primal steps are pure floating-point noise.
  c.primal_tol = 1e-10;
  c.step_tol = 1e-10;
  c.residual_check_every = 1;
  return c;
}

CertificationRun certification_run(std::uint64_t seed) {
  CertificationRun run{make_dense_instance(certification_params(seed)), certification_config(),
                       {}, CheckStatus::unchecked, {}, {}, {}};
  const ProblemSpec& pr = run.instance.problem;
  run.constants = constants_for(pr, run.config);
  IlrAdmm solver(pr, run.config);
  // x0 = argmin f gives grad f(x0) = 0 = -A^T p0, so the dual relations hold
  // from the first step.
  run.start = solver.initial_state(least_squares_minimizer(pr));
  run.p0_in_range = in_range_of_a(pr, run.start.p);
  run.result = solver.run(run.start);
  SolverConfig full = run.config;
  full.primal_tol = full.step_tol = 0.0;
  IlrAdmm capped(pr, full);
  run.full = capped.run(run.start);
  return run;
}

// -------------------------------------------------------------- 2: descent

CriterionResult verify_descent(const CertificationRun& run) {
  const auto t0 = Clock::now();
  CriterionResult out{2, "sufficient descent at fixed alpha", false, "", 0.0};
  const DiagnosticsConstants& k = run.constants;
  bool alpha_fixed = true;
  for (const TraceRow& r : run.full.trace.rows) alpha_fixed &= r.alpha == run.config.alpha_max;
  const CheckReport rep = check_descent(run.full.trace, k.nu);
  const bool cond = k.descent_condition.value_or(false) && k.nu && *k.nu > 0;
  out.seconds = seconds_since(t0) + run.full.elapsed_seconds;
  out.passed = rep.passed() && cond && alpha_fixed && out.seconds < 60.0 &&
               run.full.trace.size() == run.config.max_iter;
  out.detail = "iterations " + std::to_string(run.full.trace.size()) + ", checked " +
               std::to_string(rep.checked) + ", violations " +
               std::to_string(rep.violations.size()) + ", nu " + fmt(k.nu.value_or(kNaN)) +
               ", delta " + fmt(k.delta.value_or(kNaN)) + ", eta " + fmt(k.eta) +
               ", alpha > max(1, 2 eta/delta): " + (cond ? "yes" : "no") +
               (alpha_fixed ? "" : ", alpha not fixed");
  return out;
}

// ------------------------------------------------------------ 3: dual bound

CriterionResult verify_dual_bound(const CertificationRun& run) {
  const auto t0 = Clock::now();
  CriterionResult out{3, "dual movement and dual boundedness", false, "", 0.0};
  const CheckReport a = check_dual_bound(run.result.trace, run.constants, run.p0_in_range);
  const CheckReport b = check_dual_boundedness(run.result.trace, run.constants, run.p0_in_range);
  double worst = 0.0;
  for (const TraceRow& r : run.result.trace.rows)
    if (r.step_x > 0) worst = std::max(worst, r.dual_step / r.step_x);
  out.seconds = seconds_since(t0);
  out.passed = a.passed() && b.passed();
  out.detail = "range " + to_string(run.constants.range) + ", p0 in Im(A) " +
               to_string(run.p0_in_range) + ", step bound " + to_string(a.status) + " (" +
               std::to_string(a.violations.size()) + " violations, max |dp|/|dx| " + fmt(worst) +
               " vs L_f/theta " + fmt(std::sqrt(run.constants.eta)) + "), norm bound " +
               to_string(b.status) + " (" + std::to_string(b.violations.size()) + " violations)";
  return out;
}

// ----------------------------------------------------------- 4: criticality

CriterionResult verify_criticality(const CertificationRun& run) {
  const auto t0 = Clock::now();
  CriterionResult out{4, "convergence to a critical point", false, "", 0.0};
  const ProblemSpec& pr = run.instance.problem;
  const SolverState& s = run.result.state;
  const double primal = pr.constraints.residual(s.x, s.y).norm();
  const double kkt = kkt_residual(s.x, s.y, s.p, pr).value();
  const IterateTrace& tr = run.result.trace;
  const double last_step =
      tr.empty() ? kNaN : std::hypot(tr.rows.back().step_x, tr.rows.back().step_y);
  const double length = run.result.path_length;
  out.seconds = seconds_since(t0);
  out.passed = primal <= 1e-6 && kkt <= 1e-5 && last_step <= 1e-8 && std::isfinite(length);
  out.detail = "stopped at iteration " + std::to_string(s.k) +
               (run.result.converged ? " by tolerance" : " at the cap") + ", primal " +
               fmt(primal) + ", kkt " + fmt(kkt) + ", last step " + fmt(last_step) +
               ", path length " + fmt(length);
  return out;
}

// --------------------------------------------------------- 5: relative error

CriterionResult verify_relative_error(const CertificationRun& run) {
  const auto t0 = Clock::now();
  CriterionResult out{5, "bounded relative error", false, "", 0.0};
  const auto& rows = run.result.trace.rows;
  bool finite = !rows.empty();
  for (const TraceRow& r : rows) finite &= std::isfinite(r.rel_error);
  // No drift toward the cap: the last quarter of the run stays within a
  // factor 10 of the maximum over the first three quarters.
  const size_t split = rows.size() - rows.size() / 4;
  double head = 0.0, tail = 0.0;
  for (size_t i = 0; i < rows.size(); ++i) {
    double& bucket = i < split ? head : tail;
    bucket = std::max(bucket, rows[i].rel_error);
  }
  const double tau = run.result.tau_hat;
  out.seconds = seconds_since(t0);
  out.passed = finite && std::isfinite(tau) && tail <= 10.0 * head;
  out.detail = "tau_hat " + fmt(tau) + ", head max " + fmt(head) + ", tail max " + fmt(tail) +
               (finite ? "" : ", non-finite ratio present");
  return out;
}

// -------------------------------------------------------- 6: x exactness

CriterionResult verify_x_exactness(const std::vector<const IterateTrace*>& traces) {
  const auto t0 = Clock::now();
  CriterionResult out{6, "x-update exactness", false, "", 0.0};
  long checked = 0, bad = 0;
  double worst = 0.0;
  for (const IterateTrace* t : traces)
    for (const TraceRow& r : t->rows) {
      if (std::isnan(r.x_residual)) continue;
      ++checked;
      const double rel = r.x_residual / (1.0 + r.x_norm);
      worst = std::max(worst, rel);
      if (!(rel <= 1e-8)) ++bad;
    }
  out.seconds = seconds_since(t0);
  out.passed = checked > 0 && bad == 0;
  out.detail = std::to_string(traces.size()) + " runs, " + std::to_string(checked) +
               " residuals checked, worst relative " + fmt(worst) + ", violations " +
               std::to_string(bad);
  return out;
}

// ------------------------------------------------------ 7: convex collapse

ConvexCollapse verify_convex_collapse(std::uint64_t seed, int iterations) {
  const auto t0 = Clock::now();
  ConvexCollapse out;
  out.criterion = {7, "convex-case collapse", false, "", 0.0};
  DenseInstanceParams prm = certification_params(seed);
  prm.outer = ConcaveOuter::power(1.0, 0.0, 0.5);
  const Instance inst = make_dense_instance(prm);
  const ProblemSpec& pr = inst.problem;

  BaselineConfig cfg;
  cfg.max_iter = iterations;
  cfg.residual_check_every = 1;
  cfg.inner_iters = 10;
  // The direct step's prox has curvature alpha ||B||^2 exactly; a tiny
  // margin keeps the linearized steps within rounding of it.
  cfg.r_margin = 1e-12;

  IlrAdmm ilr(pr, cfg);
  DirectAdmm direct(pr, cfg);
  InloopAdmm inloop(pr, cfg);
  const SolverState start = ilr.initial_state();
  std::vector<SolverState> seq[3];
  AdmmSolver* solvers[] = {&ilr, &direct, &inloop};
  for (int a = 0; a < 3; ++a) {
    solvers[a]->on_iterate([&seq, a](const SolverState& s) { seq[a].push_back(s); });
    out.traces.push_back(solvers[a]->run(start).trace);
  }
  double worst = 0.0;
  bool same_length = seq[0].size() == seq[1].size() && seq[0].size() == seq[2].size();
  for (size_t k = 0; same_length && k < seq[0].size(); ++k)
    for (int a = 1; a < 3; ++a) {
      const SolverState& u = seq[0][k];
      const SolverState& v = seq[a][k];
      worst = std::max({worst, (u.x - v.x).lpNorm<Eigen::Infinity>(),
                        (u.y - v.y).lpNorm<Eigen::Infinity>(),
                        (u.p - v.p).lpNorm<Eigen::Infinity>()});
    }
  out.criterion.seconds = seconds_since(t0);
  out.criterion.passed = same_length && !seq[0].empty() && worst <= 1e-8;
  out.criterion.detail = std::to_string(seq[0].size()) +
                         " iterations, max coordinate gap over (x, y, p) " + fmt(worst);
  return out;
}

// --------------------------------------------------------------- 8: deblur

ExperimentConfig acceptance_deblur_config() {
  ExperimentConfig c;
  c.phantom_width = 64;
  c.phantom_height = 64;
  c.kernel_size = 9;
  c.kernel_width = 2.0;
  c.noise_std = 0.01;
  c.seed = 0;
  c.q = 0.5;
  c.epsilon = 1e-7;
  c.sigma_reg = 1e-4;
  c.alpha0 = 1.0;
  c.rho = 1.05;
  c.alpha_max = 1e3;
  c.r_margin = 1e-6;
  c.max_iter = 200;
  c.tol = 0.0;
  c.algo = AlgorithmKind::ilr;
  return c;
}

DeblurCheck verify_deblur(bool compare_algorithms) {
  const auto t0 = Clock::now();
  DeblurCheck out;
  out.criterion = {8, "deblurring at desk scale", false, "", 0.0};
  const ExperimentConfig cfg = acceptance_deblur_config();

  const auto t_run = Clock::now();
  const DeblurReport first = run_deblur(cfg);
  const double run_seconds = seconds_since(t_run);
  const DeblurReport second = run_deblur(cfg);
  const DeblurRun& a = first.runs.front();
  const DeblurRun& b = second.runs.front();
  const bool same_csv = format_csv(a.result.trace) == format_csv(b.result.trace);
  const bool same_image = a.restored.pixels == b.restored.pixels;
  const double gain = a.snr_restored - a.snr_degraded;
  out.trace = a.result.trace;

  std::ostringstream cmp;
  cmp << "three-algorithm SNR report (dB, " << cfg.max_iter << " iterations):\n";
  cmp << "  degraded  snr " << fmt(a.snr_degraded) << "\n";
  cmp << "  ilr       snr " << fmt(a.snr_restored) << "  time " << fmt(a.result.elapsed_seconds)
      << "s\n";
  if (compare_algorithms) {
    for (AlgorithmKind kind : {AlgorithmKind::direct, AlgorithmKind::inloop}) {
      ExperimentConfig c = cfg;
      c.algo = kind;
      const DeblurReport r = run_deblur(c);
      cmp << "  " << to_string(kind) << std::string(10 - to_string(kind).size(), ' ') << "snr "
          << fmt(r.runs.front().snr_restored) << "  time "
          << fmt(r.runs.front().result.elapsed_seconds) << "s\n";
    }
  }
  out.comparison = cmp.str();
  out.criterion.seconds = seconds_since(t0);
  out.criterion.passed = gain >= 2.0 && run_seconds < 60.0 && same_csv && same_image;
  out.criterion.detail = "snr " + fmt(a.snr_degraded) + " -> " + fmt(a.snr_restored) +
                         " (gain " + fmt(gain) + " dB), run " + fmt(run_seconds) +
                         "s, rerun bitwise identical: " + (same_csv && same_image ? "yes" : "no");
  return out;
}

// ------------------------------------------------------------ 9: operators

namespace {

struct AdjointStats {
  double worst = 0.0;
  int failures = 0;
};

AdjointStats adjoint_test(const LinearOperator& op, std::mt19937_64& rng, int pairs) {
  std::normal_distribution<double> g;
  AdjointStats st;
  for (int k = 0; k < pairs; ++k) {
    Vector x(op.in_dim()), p(op.out_dim());
    for (long i = 0; i < x.size(); ++i) x[i] = g(rng);
    for (long i = 0; i < p.size(); ++i) p[i] = g(rng);
    const double lhs = op.apply(x).dot(p);
    const double rhs = x.dot(op.adjoint(p));
    const double rel = std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
    st.worst = std::max(st.worst, rel);
    if (!(rel <= 1e-10)) ++st.failures;
  }
  return st;
}

// Singular values from a dense decomposition of the materialized operator.
enum class Oracle { jacobi_svd, bdc_svd, gram_eigen, tridiagonal_gram };

Vector oracle_singular_values(const LinearOperator& op, Oracle how) {
  switch (how) {
    case Oracle::jacobi_svd: return Eigen::JacobiSVD<Matrix>(op.to_dense()).singularValues();
    case Oracle::bdc_svd: return Eigen::BDCSVD<Matrix>(op.to_dense()).singularValues();
    case Oracle::gram_eigen: {
      // Squaring puts null-space eigenvalues at rounding level (~1e-15
      // lambda_max), above the singular-value cutoff once square-rooted, so
      // the rank cutoff is applied to the eigenvalues instead.
      Eigen::SelfAdjointEigenSolver<Matrix> es(op.gram(), Eigen::EigenvaluesOnly);
      Vector lambda = es.eigenvalues();
      const double top = lambda.maxCoeff();
      for (double& l : lambda)
        if (l <= 1e-10 * top) l = 0.0;
      return lambda.cwiseSqrt();
    }
    case Oracle::tridiagonal_gram: {
      // Gram matrix assembled column by column; only the tridiagonal band may
      // be nonzero.
      const long n = op.in_dim();
      Vector diag(n), sub(std::max(0L, n - 1));
      for (long j = 0; j < n; ++j) {
        Vector e = Vector::Zero(n);
        e[j] = 1.0;
        Vector col = op.adjoint(op.apply(e));
        diag[j] = col[j];
        if (j + 1 < n) sub[j] = col[j + 1];
        col[j] = 0.0;
        if (j + 1 < n) col[j + 1] = 0.0;
        if (j > 0) col[j - 1] = 0.0;
        if (col.lpNorm<Eigen::Infinity>() != 0.0)
          throw Error("tridiagonal oracle applied to a non-tridiagonal Gram matrix");
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es;
      es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    }
  }
  return {};
}

}  // namespace

CriterionResult verify_operators(std::uint64_t seed) {
  const auto t0 = Clock::now();
  CriterionResult out{9, "adjoint and spectral correctness", false, "", 0.0};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto random_matrix = [&](long r, long c) {
    Matrix m(r, c);
    for (long j = 0; j < c; ++j)
      for (long i = 0; i < r; ++i) m(i, j) = g(rng);
    return m;
  };
  Matrix small_kernel(3, 3);
  small_kernel << 0.05, 0.1, 0.05, 0.1, 0.4, 0.1, 0.05, 0.1, 0.05;

  struct Case {
    std::string name;
    LinearOperator op;
    Oracle oracle;
  };
  std::vector<Case> cases = {
      {"dense 5x7", LinearOperator::dense(random_matrix(5, 7)), Oracle::jacobi_svd},
      {"dense 300x200", LinearOperator::dense(random_matrix(300, 200)), Oracle::jacobi_svd},
      {"scaled-identity 4096 (-1)", LinearOperator::identity(4096, -1.0),
       Oracle::tridiagonal_gram},
      {"difference-1d 4", LinearOperator::difference_1d(4), Oracle::jacobi_svd},
      {"difference-1d 4096", LinearOperator::difference_1d(4096), Oracle::tridiagonal_gram},
      {"difference-2d 3x3", LinearOperator::difference_2d(3, 3), Oracle::jacobi_svd},
      {"difference-2d 7x12", LinearOperator::difference_2d(7, 12), Oracle::jacobi_svd},
      {"difference-2d 64x64", LinearOperator::difference_2d(64, 64), Oracle::gram_eigen},
      {"convolution-2d 12x10 3x3", LinearOperator::convolution_2d(12, 10, small_kernel),
       Oracle::jacobi_svd},
      {"convolution-2d 32x32 gaussian 9/2",
       LinearOperator::convolution_2d(32, 32, gaussian_kernel(9, 2.0)), Oracle::bdc_svd},
      {"convolution-2d 64x64 gaussian 9/2",
       LinearOperator::convolution_2d(64, 64, gaussian_kernel(9, 2.0)), Oracle::bdc_svd},
  };

  bool ok = true;
  std::ostringstream detail;
  double worst_adj = 0.0, worst_norm = 0.0, worst_theta = 0.0;
  for (const Case& c : cases) {
    const AdjointStats adj = adjoint_test(c.op, rng, 100);
    const Vector sv = oracle_singular_values(c.op, c.oracle);
    const double top = sv.maxCoeff();
    double bottom = top;
    for (double v : sv)
      if (v > 1e-10 * top) bottom = std::min(bottom, v);
    const double norm = operator_norm(c.op);
    const double theta = smallest_positive_singular_value(c.op);
    const double en = std::abs(norm - top) / top;
    const double et = std::abs(theta - bottom) / bottom;
    worst_adj = std::max(worst_adj, adj.worst);
    worst_norm = std::max(worst_norm, en);
    worst_theta = std::max(worst_theta, et);
    const bool pass = adj.failures == 0 && en <= 1e-6 && et <= 1e-6;
    if (!pass) {
      ok = false;
      detail << " [" << c.name << ": adjoint " << fmt(adj.worst) << ", norm " << fmt(en)
             << ", theta " << fmt(et) << "]";
    }
  }
  out.seconds = seconds_since(t0);
  out.passed = ok;
  out.detail = std::to_string(cases.size()) + " operators, worst adjoint " + fmt(worst_adj) +
               ", worst norm rel " + fmt(worst_norm) + ", worst theta rel " + fmt(worst_theta) +
               detail.str();
  return out;
}

// ------------------------------------------------------------------- all

std::vector<CriterionResult> verify_all(
    const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> results;
  auto record = [&](CriterionResult r) {
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  };
  record(verify_prox_oracle());
  const CertificationRun cert = certification_run();
  record(verify_descent(cert));
  record(verify_dual_bound(cert));
  record(verify_criticality(cert));
  record(verify_relative_error(cert));
  const ConvexCollapse collapse = verify_convex_collapse();
  DeblurCheck deblur = verify_deblur(true);
  std::vector<const IterateTrace*> traces = {&cert.result.trace, &cert.full.trace, &deblur.trace};
  for (const IterateTrace& t : collapse.traces) traces.push_back(&t);
  record(verify_x_exactness(traces));
  record(collapse.criterion);
  deblur.criterion.detail += "\n" + deblur.comparison;
  record(deblur.criterion);
  record(verify_operators());
  return results;
}

}  // namespace ilradmm
