#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "ilradmm/error.hpp"
#include "ilradmm/penalties.hpp"
#include "oracles.hpp"

using namespace ilradmm;
using fixture::vec;

namespace {

std::vector<ConcaveOuter> every_outer() {
  return {ConcaveOuter::power(0.5, 1e-7, 1.0), ConcaveOuter::power(0.3, 0.01, 2.0),
          ConcaveOuter::power(1.0, 0.0, 0.7),  ConcaveOuter::log(0.1, 1.5),
          ConcaveOuter::etp(2.0, 1.0),         ConcaveOuter::geman(0.5, 1.0),
          ConcaveOuter::laplace(0.8, 1.2)};
}

double composite_objective(const ConcaveOuter& g, const InnerConvex& h, double alpha, double z,
                           double t) {
  return outer_value(g, inner_value(h, t)) + 0.5 * alpha * (t - z) * (t - z);
}

}  // namespace

TEST_SUITE("penalties") {
  TEST_CASE("outer values") {
    CHECK(outer_value(ConcaveOuter::power(1.0, 0.0, 1.0), 5.0) == doctest::Approx(5.0));
    CHECK(std::abs(outer_value(ConcaveOuter::power(0.5, 1e-7, 1.0), 0.0) - std::sqrt(1e-7)) <=
          1e-18);
    CHECK(std::abs(outer_value(ConcaveOuter::power(0.5, 1e-7, 1.0), 0.0) - 3.1623e-4) <= 1e-8);
    CHECK(outer_value(ConcaveOuter::power(0.5, 0.0, 2.0), 9.0) == doctest::Approx(6.0));
    CHECK_THROWS_AS(outer_value(ConcaveOuter::power(0.5, 0.0), -1e-12), DomainError);
  }

  TEST_CASE("outer derivatives") {
    const double d = outer_derivative(ConcaveOuter::power(0.5, 1e-7, 1.0), 0.0);
    CHECK(std::abs(d - 0.5 / std::sqrt(1e-7)) <= 1e-9);
    CHECK(std::abs(d - 1581.14) <= 0.01);
    CHECK_THROWS_AS(outer_derivative(ConcaveOuter::power(0.5, 0.0), 0.0), DomainError);
    try {
      outer_derivative(ConcaveOuter::power(0.5, 0.0), 0.0);
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("epsilon > 0") != std::string::npos);
    }
  }

  TEST_CASE("derivatives match central differences") {
    for (const ConcaveOuter& g : every_outer())
      for (double s : {0.05, 0.4, 1.0, 3.7}) {
        const double h = 1e-6;
        const double fd = (outer_value(g, s + h) - outer_value(g, s - h)) / (2 * h);
        CHECK(std::abs(outer_derivative(g, s) - fd) <= 1e-5 * (1.0 + std::abs(fd)));
        const double fd2 = (outer_derivative(g, s + h) - outer_derivative(g, s - h)) / (2 * h);
        CHECK(std::abs(outer_second_derivative(g, s) - fd2) <= 1e-4 * (1.0 + std::abs(fd2)));
      }
  }

  TEST_CASE("outer functions are nondecreasing and concave") {
    for (const ConcaveOuter& g : every_outer()) {
      double prev = outer_value(g, 0.0);
      for (int i = 1; i < 400; ++i) {
        const double s = 0.025 * i;
        CHECK(outer_value(g, s) >= prev);
        prev = outer_value(g, s);
        CHECK(outer_derivative(g, s) >= 0.0);
        CHECK(outer_second_derivative(g, s) <= 1e-12);
      }
    }
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ConcaveOuter::power(0.0, 1e-7), ParameterError);
    CHECK_THROWS_AS(ConcaveOuter::power(1.5, 1e-7), ParameterError);
    CHECK_THROWS_AS(ConcaveOuter::power(0.5, -1.0), ParameterError);
    CHECK_THROWS_AS(ConcaveOuter::power(0.5, 1e-7, -1.0), ParameterError);
    CHECK_THROWS_AS(ConcaveOuter::log(0.0), ParameterError);
    CHECK_THROWS_AS(ConcaveOuter::geman(0.0), ParameterError);
    CHECK_THROWS_AS(outer_kind_from_string("scad"), ParameterError);
    CHECK(outer_kind_from_string("laplace") == OuterKind::laplace);
    CHECK(inner_kind_from_string("square") == InnerKind::square);
  }

  TEST_CASE("lipschitz constant of the power derivative") {
    const ConcaveOuter g = ConcaveOuter::power(0.5, 1e-2, 2.0);
    REQUIRE(g.lipschitz_constant().has_value());
    CHECK(*g.lipschitz_constant() == doctest::Approx(2.0 * 0.25 * std::pow(1e-2, -1.5)));
    CHECK(std::abs(outer_second_derivative(g, 0.0)) == doctest::Approx(*g.lipschitz_constant()));
    CHECK_FALSE(ConcaveOuter::power(0.5, 0.0).lipschitz_constant().has_value());
  }

  TEST_CASE("weights") {
    const WeightVector w =
        compute_weights(ConcaveOuter::power(0.5, 1e-7, 1.0), InnerConvex::abs(), Vector::Zero(3));
    REQUIRE(w.size() == 3);
    for (long i = 0; i < 3; ++i) CHECK(std::abs(w.w[i] - 1581.14) <= 0.01);
    CHECK(w.clamped == 0);

    std::mt19937_64 rng(1);
    const Vector y = oracle::random_vector(50, rng);
    const WeightVector ones = compute_weights(ConcaveOuter::power(1.0, 0.0), InnerConvex::abs(), y);
    CHECK((ones.w.array() == 1.0).all());

    // Weights are g'(h(y)); entrywise and sign-blind for abs.
    const ConcaveOuter g = ConcaveOuter::log(0.3, 2.0);
    const WeightVector lw = compute_weights(g, InnerConvex::abs(), y);
    for (long i = 0; i < y.size(); ++i) CHECK(lw.w[i] == outer_derivative(g, std::abs(y[i])));
    CHECK((compute_weights(g, InnerConvex::abs(), -y).w - lw.w).norm() == 0.0);
  }

  TEST_CASE("weights clamp underflow") {
    const WeightVector w = compute_weights(ConcaveOuter::laplace(1e-3, 1.0), InnerConvex::square(),
                                           vec({0.0, 10.0, 100.0}));
    CHECK(w.clamped == 2);
    CHECK(w.min() == kWeightFloor);
    CHECK_THROWS_AS(compute_weights(ConcaveOuter::log(1.0), InnerConvex::abs(), vec({kNaN})),
                    DomainError);
  }

  TEST_CASE("weighted prox examples") {
    const InnerConvex a = InnerConvex::abs();
    CHECK(prox_weighted_inner(a, 3.0, 2.0, 0.0) == 0.0);
    CHECK(prox_weighted_inner(a, 0.0, 2.0, -1.25) == -1.25);
    CHECK(std::abs(prox_weighted_inner(a, 0.3, 1.0, 1.0) - 0.7) <= 1e-15);
    const double grid = oracle::grid_argmin(
        [](double t) { return 0.3 * std::abs(t) + 0.5 * (t - 1.0) * (t - 1.0); }, -2.0, 2.0, 1e-5);
    CHECK(std::abs(grid - 0.7) <= 1e-4);
    CHECK_THROWS_AS(prox_weighted_inner(a, 1.0, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(prox_weighted_inner(a, 1.0, -2.0, 1.0), ParameterError);
    CHECK(prox_weighted_inner(InnerConvex::square(), 1.0, 2.0, 3.0) == doctest::Approx(1.5));
  }

  TEST_CASE("weighted prox agrees with brute force") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> v(-4, 4), w(0, 3), r(0.2, 5);
    for (int i = 0; i < 200; ++i) {
      const InnerConvex h = i % 2 ? InnerConvex::square() : InnerConvex::abs();
      const double vi = v(rng), wi = w(rng), ri = r(rng);
      const double got = prox_weighted_inner(h, wi, ri, vi);
      const double ref = oracle::grid_argmin(
          [&](double t) { return wi / ri * inner_value(h, t) + 0.5 * (t - vi) * (t - vi); }, -5.0,
          5.0, 1e-4);
      CHECK(std::abs(got - ref) <= 2e-4);
    }
  }

  TEST_CASE("weighted prox is nonexpansive and sign-preserving") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 500; ++i) {
      const InnerConvex h = i % 2 ? InnerConvex::abs() : InnerConvex::square();
      const double a = u(rng), b = u(rng), w = std::abs(u(rng)), r = 0.5 + std::abs(u(rng));
      const double pa = prox_weighted_inner(h, w, r, a), pb = prox_weighted_inner(h, w, r, b);
      CHECK(std::abs(pa - pb) <= std::abs(a - b) + 1e-15);
      CHECK(pa * a >= 0.0);
      CHECK(std::abs(pa) <= std::abs(a));
    }
  }

  TEST_CASE("composite prox special cases") {
    for (const ConcaveOuter& g : every_outer()) {
      CHECK(scalar_prox_composite(g, InnerConvex::abs(), 1.3, 0.0) == 0.0);
      CHECK(scalar_prox_composite(g, InnerConvex::square(), 0.4, 0.0) == 0.0);
    }
    ConcaveOuter zero = ConcaveOuter::power(0.5, 1e-7, 0.0);
    CHECK(scalar_prox_composite(zero, InnerConvex::abs(), 2.0, -1.7) == -1.7);
    CHECK_THROWS_AS(scalar_prox_composite(zero, InnerConvex::abs(), 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(scalar_prox_composite(zero, InnerConvex::abs(), 1.0, kNaN), DomainError);
  }

  TEST_CASE("composite prox matches a fine grid at z = 3") {
    const ConcaveOuter g = ConcaveOuter::power(0.5, 0.0, 1.0);
    const double got = scalar_prox_composite(g, InnerConvex::abs(), 1.0, 3.0);
    const double ref = oracle::grid_argmin(
        [&](double t) { return composite_objective(g, InnerConvex::abs(), 1.0, 3.0, t); }, -1.0,
        4.0, 1e-6);
    CHECK(std::abs(got - ref) <= 1e-4);
    // Stationary point of sqrt(t) + (t - 3)^2 / 2 on t > 0.
    CHECK(std::abs(0.5 / std::sqrt(got) + got - 3.0) <= 1e-9);
  }

  TEST_CASE("composite prox is the global minimizer on random cases") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> us(0, 3), ua(0.2, 6), uz(-4, 4);
    const double qs[] = {0.3, 0.5, 0.7, 1.0};
    for (int i = 0; i < 300; ++i) {
      const ConcaveOuter g = ConcaveOuter::power(qs[i % 4], i % 3 ? 1e-7 : 0.0, us(rng));
      const InnerConvex h = i % 5 ? InnerConvex::abs() : InnerConvex::square();
      const double alpha = ua(rng), z = uz(rng);
      const double got = scalar_prox_composite(g, h, alpha, z);
      auto obj = [&](double t) { return composite_objective(g, h, alpha, z, t); };
      const double ref = oracle::grid_argmin(obj, -5.0, 5.0, 2e-4);
      CHECK(obj(got) <= obj(ref) + 1e-9);
      CHECK(got * z >= 0.0);
    }
  }

  TEST_CASE("composite prox is odd in z") {
    for (const ConcaveOuter& g : every_outer())
      for (double z : {0.01, 0.3, 1.0, 2.5, 7.0})
        CHECK(scalar_prox_composite(g, InnerConvex::abs(), 1.5, -z) ==
              -scalar_prox_composite(g, InnerConvex::abs(), 1.5, z));
  }

  TEST_CASE("q = 1 composite prox is soft thresholding") {
    const ConcaveOuter g = ConcaveOuter::power(1.0, 0.0, 0.8);
    for (double z : {-3.0, -0.5, 0.1, 0.39, 0.41, 2.0}) {
      const double soft = std::copysign(std::max(std::abs(z) - 0.8 / 2.0, 0.0), z);
      CHECK(std::abs(scalar_prox_composite(g, InnerConvex::abs(), 2.0, z) - soft) <= 1e-12);
    }
  }

  TEST_CASE("penalty value sums entrywise") {
    const ConcaveOuter g = ConcaveOuter::power(0.5, 0.0, 2.0);
    CHECK(penalty_value(g, InnerConvex::abs(), vec({9.0, -4.0, 0.0})) == doctest::Approx(10.0));
    CHECK(penalty_value(g, InnerConvex::square(), vec({3.0})) == doctest::Approx(6.0));
  }
}
