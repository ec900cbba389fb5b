#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "ilradmm/diagnostics.hpp"
#include "ilradmm/error.hpp"
#include "ilradmm/instances.hpp"
#include "ilradmm/solver.hpp"
#include "oracles.hpp"

using namespace ilradmm;
using fixture::mat;
using fixture::vec;

namespace {

IterateTrace synthetic_trace(const std::vector<double>& values, double initial) {
  IterateTrace t;
  t.initial_lagrangian = initial;
  for (size_t i = 0; i < values.size(); ++i) {
    TraceRow r;
    r.iter = static_cast<long>(i) + 1;
    r.alpha = 10.0;
    r.lagrangian = values[i];
    r.step_x = 0.1;
    r.step_y = 0.0;
    t.rows.push_back(r);
  }
  return t;
}

ProblemSpec random_problem(std::uint64_t seed, long n, long m) {
  std::mt19937_64 rng(seed);
  return fixture::quadratic_problem(oracle::random_matrix(n + 3, n, rng),
                                    oracle::random_vector(n + 3, rng),
                                    oracle::random_matrix(m, n, rng), oracle::random_matrix(m, m, rng),
                                    oracle::random_vector(m, rng), ConcaveOuter::log(0.2, 1.3));
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("lagrangian matches a term-by-term recomputation") {
    std::mt19937_64 rng(17);
    const long n = 7, m = 5;
    const Matrix psi = oracle::random_matrix(9, n, rng), a = oracle::random_matrix(m, n, rng),
                 b = oracle::random_matrix(m, m, rng);
    const Vector data = oracle::random_vector(9, rng), c = oracle::random_vector(m, rng);
    const ConcaveOuter g = ConcaveOuter::power(0.5, 1e-7, 0.8);
    const ProblemSpec pr = fixture::quadratic_problem(psi, data, a, b, c, g);
    const Vector x = oracle::random_vector(n, rng), y = oracle::random_vector(m, rng),
                 p = oracle::random_vector(m, rng);
    const double alpha = 3.5;
    double ref = 0.0;
    for (long i = 0; i < psi.rows(); ++i) {
      const double e = psi.row(i).dot(x) - data[i];
      ref += 0.5 * e * e;
    }
    for (long i = 0; i < m; ++i) ref += 0.8 * std::sqrt(std::abs(y[i]) + 1e-7);
    for (long i = 0; i < m; ++i) {
      const double res = a.row(i).dot(x) + b.row(i).dot(y) - c[i];
      ref += p[i] * res + 0.5 * alpha * res * res;
    }
    const double got = lagrangian_value(x, y, p, pr, alpha);
    CHECK(std::abs(got - ref) <= 1e-12 * std::abs(ref));
    CHECK_THROWS_AS(lagrangian_value(x, y, Vector::Zero(m + 1), pr, alpha), DimensionError);
  }

  TEST_CASE("descent check on synthetic traces") {
    const CheckReport ok = check_descent(synthetic_trace({9, 8, 7, 6, 5}, 10));
    CHECK(ok.passed());
    CHECK(ok.checked == 5);
    const CheckReport bad = check_descent(synthetic_trace({9, 8, 9, 7, 6}, 10));
    CHECK(bad.status == CheckStatus::violated);
    REQUIRE(bad.violations.size() == 1);
    CHECK(bad.violations[0].index == 2);
    CHECK(bad.violations[0].kind == "increase");
    CHECK(check_descent(IterateTrace{}).status == CheckStatus::unchecked);
  }

  TEST_CASE("quantified descent uses nu") {
    // step_x = 0.1 gives ||dz||^2 = 0.01; a drop of 1 needs nu <= 100 + 1e-6.
    const IterateTrace t = synthetic_trace({9, 8, 7}, 10);
    CHECK(check_descent(t, 50.0).passed());
    const CheckReport r = check_descent(t, 200.0);
    CHECK(r.violations.size() == 3);
    CHECK(r.violations[0].kind == "quantified");
  }

  TEST_CASE("descent check skips alpha changes") {
    IterateTrace t = synthetic_trace({9, 12, 11}, 10);
    t.rows[1].alpha = 20.0;
    t.rows[2].alpha = 20.0;
    const CheckReport r = check_descent(t);
    CHECK(r.passed());
    CHECK(r.checked == 2);
  }

  TEST_CASE("descent on the converged seeded run") {
    const Instance inst = make_dense_instance(DenseInstanceParams{});
    SolverConfig cfg;
    cfg.alpha0 = cfg.alpha_max = 1e3;
    cfg.max_iter = 2000;
    cfg.primal_tol = cfg.step_tol = 1e-9;
    // From x0 = argmin f the dual relation -A^T p = grad f holds at k = 0 too,
    // so the descent bound applies from the first step.
    IlrAdmm solver(inst.problem, cfg);
    const RunResult r = solver.run(solver.initial_state(least_squares_minimizer(inst.problem)));
    CHECK(r.converged);
    const DiagnosticsConstants k = constants_for(inst.problem, cfg);
    REQUIRE(k.nu.has_value());
    CHECK(check_descent(r.trace, k.nu).passed());
  }

  TEST_CASE("descent constant arithmetic") {
    CHECK(descent_constant(1.0, 1.0, 4.0, 4.0 + 2.0, 1.0) == doctest::Approx(0.25));
    CHECK(descent_constant(10.0, 1.0, 4.0, 4.0 + 2.0, 1.0) == doctest::Approx(1.0));
  }

  TEST_CASE("constants for A = I") {
    // Psi = I gives L_f = 1.
    const ProblemSpec pr = fixture::quadratic_problem(
        Matrix::Identity(3, 3), Vector::Ones(3), Matrix::Identity(3, 3),
        -Matrix::Identity(3, 3), Vector::Zero(3), ConcaveOuter::power(0.5, 1e-7));
    SolverConfig cfg;
    const DiagnosticsConstants k = constants_for(pr, cfg);
    CHECK(k.theta == doctest::Approx(1.0));
    CHECK(k.eta == doctest::Approx(1.0));
    CHECK(k.delta.has_value());
    CHECK(*k.delta == doctest::Approx(2.0));
    CHECK(k.range == CheckStatus::passed);
    CHECK(k.descent_condition.value());
  }

  TEST_CASE("descent condition flag at the boundary") {
    // delta = 2 and eta = 64: 2 eta / delta = 64, so alpha = 64 fails and 65 passes.
    const ProblemSpec pr = fixture::quadratic_problem(
        Matrix::Identity(2, 2) * std::sqrt(8.0), Vector::Ones(2), Matrix::Identity(2, 2),
        -Matrix::Identity(2, 2), Vector::Zero(2), ConcaveOuter::power(0.5, 1e-7));
    ProblemSpec with_delta = pr;
    with_delta.delta = 2.0;
    SolverConfig cfg;
    cfg.alpha0 = cfg.alpha_max = 64.0;
    CHECK_FALSE(constants_for(with_delta, cfg).descent_condition.value());
    cfg.alpha0 = cfg.alpha_max = 65.0;
    CHECK(constants_for(with_delta, cfg).descent_condition.value());
  }

  TEST_CASE("missing delta omits nu") {
    SmoothLoss loss(
        2, [](const Vector& x) { return 0.5 * x.squaredNorm(); },
        [](const Vector& x) -> Vector { return x; }, 1.0);
    const ProblemSpec pr(loss,
                         ConstraintSystem(LinearOperator::identity(2),
                                          LinearOperator::identity(2, -1.0), Vector::Zero(2)),
                         ConcaveOuter::power(0.5, 1e-7), InnerConvex::abs());
    const DiagnosticsConstants k = constants_for(pr, SolverConfig{});
    CHECK_FALSE(k.delta.has_value());
    CHECK_FALSE(k.nu.has_value());
    CHECK_FALSE(k.descent_condition.has_value());
  }

  TEST_CASE("dual bound holds on an A = I run") {
    std::mt19937_64 rng(4);
    const long n = 10;
    const Matrix psi = 3.0 * Matrix::Identity(n, n) + 0.2 * oracle::random_matrix(n, n, rng);
    const ProblemSpec pr = fixture::quadratic_problem(
        psi, oracle::random_vector(n, rng), Matrix::Identity(n, n), -Matrix::Identity(n, n),
        Vector::Zero(n), ConcaveOuter::power(0.5, 1e-7, 0.5));
    SolverConfig cfg;
    cfg.alpha0 = cfg.alpha_max = 500.0;
    cfg.max_iter = 1000;
    cfg.primal_tol = cfg.step_tol = 1e-9;
    const DiagnosticsConstants k = constants_for(pr, cfg);
    CHECK(k.theta == doctest::Approx(1.0));
    CHECK(k.eta == doctest::Approx(k.lipschitz * k.lipschitz));
    IlrAdmm solver(pr, cfg);
    const SolverState start = solver.initial_state(least_squares_minimizer(pr));
    const RunResult r = solver.run(start);
    CHECK(r.converged);
    const CheckStatus p0 = in_range_of_a(pr, start.p);
    CHECK(p0 == CheckStatus::passed);
    CHECK(check_dual_bound(r.trace, k, p0).passed());
    CHECK(check_dual_boundedness(r.trace, k, p0).passed());
  }

  TEST_CASE("TV constraint leaves the dual bound unchecked") {
    const long h = 6, w = 5;
    const long m = h * (w - 1) + (h - 1) * w;
    const ProblemSpec pr(
        SmoothLoss::least_squares(LinearOperator::identity(h * w), Vector::Ones(h * w)),
        ConstraintSystem(LinearOperator::difference_2d(h, w), LinearOperator::identity(m, -1.0),
                         Vector::Zero(m)),
        ConcaveOuter::power(0.5, 1e-7), InnerConvex::abs());
    const DiagnosticsConstants k = constants_for(pr, SolverConfig{});
    CHECK(k.range == CheckStatus::violated);
    const RunResult r = run(pr, SolverConfig{});
    const CheckReport rep = check_dual_bound(r.trace, k, CheckStatus::passed);
    CHECK(rep.status == CheckStatus::unchecked);
    CHECK(rep.violations.empty());
    CHECK(check_dual_boundedness(r.trace, k, CheckStatus::passed).status ==
          CheckStatus::unchecked);
  }

  TEST_CASE("range tests") {
    const ProblemSpec pr = fixture::quadratic_problem(
        Matrix::Identity(2, 2), Vector::Zero(2), mat(2, 2, {1, 0, 0, 0}), mat(2, 1, {1, 0}),
        vec({2, 0}), ConcaveOuter::power(1.0, 0.0));
    CHECK(range_condition(pr) == CheckStatus::passed);
    CHECK(in_range_of_a(pr, vec({3, 0})) == CheckStatus::passed);
    CHECK(in_range_of_a(pr, vec({0, 1})) == CheckStatus::violated);
    CHECK(in_range_of_a(pr, vec({0, 0})) == CheckStatus::passed);
    const ProblemSpec off = fixture::quadratic_problem(
        Matrix::Identity(2, 2), Vector::Zero(2), mat(2, 2, {1, 0, 0, 0}), mat(2, 1, {1, 0}),
        vec({0, 1}), ConcaveOuter::power(1.0, 0.0));
    CHECK(range_condition(off) == CheckStatus::violated);
  }

  TEST_CASE("kkt residual vanishes at a constructed critical point") {
    const Matrix psi = mat(2, 2, {2.0, 0.5, 0.0, 1.5});
    const Matrix a = mat(2, 2, {1.0, 0.3, -0.2, 1.1});
    const Vector b = vec({1.0, -2.0}), xs = vec({0.4, -0.7});
    const ProblemSpec pr = fixture::quadratic_problem(psi, b, a, -Matrix::Identity(2, 2), a * xs,
                                                      ConcaveOuter::power(0.5, 1e-7, 1.0));
    const Vector p = -a.transpose().fullPivLu().solve(psi.transpose() * (psi * xs - b));
    const KktResidual r = kkt_residual(xs, Vector::Zero(2), p, pr);
    CHECK(r.value() <= 1e-10);
    CHECK(r.feasibility == 0.0);
  }

  TEST_CASE("kkt residual at nonzero y and under permutation") {
    // y != 0 with -B^T p = w sign(y) exactly: only x-stationarity and feasibility remain.
    const ConcaveOuter g = ConcaveOuter::power(0.5, 0.0, 1.0);
    const Vector y = vec({4.0, -1.0});
    const Vector w = compute_weights(g, InnerConvex::abs(), y).w;
    const Vector p = vec({w[0], -w[1]});  // B = -I
    const ProblemSpec pr = fixture::quadratic_problem(
        Matrix::Identity(2, 2), vec({1, 1}), Matrix::Identity(2, 2), -Matrix::Identity(2, 2),
        Vector::Zero(2), g);
    const KktResidual r = kkt_residual(y, y, p, pr);
    CHECK(r.y_stationarity <= 1e-15);
    CHECK(r.feasibility == 0.0);
    CHECK(r.x_stationarity == doctest::Approx((y - vec({1, 1}) + p).norm()));

    // Relabeling coordinates does not change the residual.
    std::mt19937_64 rng(3);
    const ProblemSpec rp = random_problem(3, 4, 4);
    const Vector x = oracle::random_vector(4, rng), yy = oracle::random_vector(4, rng),
                 pp = oracle::random_vector(4, rng);
    const double base = kkt_residual(x, yy, pp, rp).value();
    CHECK(base > 0.0);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
    perm.indices() << 2, 0, 3, 1;
    const Matrix A = rp.a().to_dense(), B = rp.b().to_dense();
    const ProblemSpec permuted = fixture::quadratic_problem(
        rp.loss.psi().to_dense(), rp.loss.data(), perm * A, perm * B * perm.transpose(),
        perm * rp.c(), rp.outer);
    CHECK(kkt_residual(x, perm * yy, perm * pp, permuted).value() ==
          doctest::Approx(base).epsilon(1e-12));
  }

  TEST_CASE("kkt residual is positive at a random point") {
    std::mt19937_64 rng(99);
    const ProblemSpec pr = random_problem(99, 6, 4);
    for (int t = 0; t < 20; ++t)
      CHECK(kkt_residual(oracle::random_vector(6, rng), oracle::random_vector(4, rng),
                         oracle::random_vector(4, rng), pr)
                .value() > 0.0);
  }

  TEST_CASE("relative error ratio") {
    const Instance inst = make_dense_instance(DenseInstanceParams{});
    SolverConfig cfg;
    cfg.alpha0 = cfg.alpha_max = 1e3;
    IlrAdmm solver(inst.problem, cfg);
    const SolverState s = solver.initial_state(least_squares_minimizer(inst.problem));
    CHECK(relative_error_ratio(s, s, inst.problem).ratio == 0.0);
    const SolverState n = solver.step(s);
    const RelativeError re = relative_error_ratio(s, n, inst.problem);
    CHECK(std::isfinite(re.ratio));
    CHECK(re.ratio > 0.0);
    // Both routes to the x-member agree once the x-update is exact.
    CHECK(re.x_member_gap <= 1e-8 * (1.0 + re.x_member));

    cfg.max_iter = 400;
    const RunResult r = IlrAdmm(inst.problem, cfg).run(s);
    CHECK(std::isfinite(r.tau_hat));
    CHECK(r.tau_hat == tau_hat(r.trace));
  }

  TEST_CASE("report text") {
    const CheckReport bad = check_descent(synthetic_trace({9, 10}, 10));
    const std::string txt = to_text(bad);
    CHECK(txt.find("status=violated") != std::string::npos);
    CHECK(txt.find("violations=1") != std::string::npos);
    CHECK(txt.find("violation.0=iter:1,kind:increase") != std::string::npos);
  }

  TEST_CASE("grid prox oracle") {
    const double t = grid_prox_oracle([](double t) { return (t - 1) * (t - 1); }, -2, 2, 1e-4);
    CHECK(std::abs(t - 1.0) <= 1e-4);
    const double z = grid_prox_oracle(
        [](double t) { return std::abs(t) + (t - 0.3) * (t - 0.3); }, -2, 2, 1e-4);
    // The smooth branches are stationary at t = -0.2 (for t > 0) and t = 0.8
    // (for t < 0), both infeasible, so only the kink remains.
    CHECK(z == 0.0);
    CHECK_THROWS_AS(grid_prox_oracle([](double t) { return 1.0 / t; }, -1, 1, 0.5), DomainError);
    CHECK_THROWS_AS(grid_prox_oracle([](double t) { return t; }, 1, -1, 0.1), ParameterError);
    CHECK_THROWS_AS(grid_prox_oracle([](double t) { return t; }, -1, 1, 0.0), ParameterError);
  }

  TEST_CASE("grid oracle agrees with the weighted prox closed form") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uv(-3, 3), uw(0, 2), ur(0.5, 4);
    for (int i = 0; i < 1000; ++i) {
      const double v = uv(rng), w = uw(rng), r = ur(rng);
      const double closed = prox_weighted_inner(InnerConvex::abs(), w, r, v);
      const double grid = grid_prox_oracle(
          [&](double t) { return w / r * std::abs(t) + 0.5 * (t - v) * (t - v); }, -4, 4, 1e-2);
      CHECK(std::abs(closed - grid) <= 1e-3);
    }
  }
}
