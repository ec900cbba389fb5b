#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ilradmm/error.hpp"
#include "ilradmm/image.hpp"
#include "ilradmm/operators.hpp"
#include "oracles.hpp"

using namespace ilradmm;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<LinearOperator> shipped_operators(std::mt19937_64& rng) {
  Matrix k5(5, 3);
  k5 << 1, 2, 1, 0, 3, 0, -1, 1, 2, 4, 0, 1, 0.5, 0.5, 0.5;
  return {
      LinearOperator::dense(oracle::random_matrix(5, 7, rng)),
      LinearOperator::dense(oracle::random_matrix(30, 12, rng)),
      LinearOperator::identity(9, -1.0),
      LinearOperator::identity(4, 2.5),
      LinearOperator::difference_1d(2),
      LinearOperator::difference_1d(50),
      LinearOperator::difference_2d(3, 3),
      LinearOperator::difference_2d(1, 7),
      LinearOperator::difference_2d(9, 4),
      LinearOperator::convolution_2d(8, 8, gaussian_kernel(3, 1.0)),
      LinearOperator::convolution_2d(11, 6, k5),
      LinearOperator::convolution_2d(16, 16, gaussian_kernel(9, 2.0)),
  };
}

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("apply on identity and forward differences") {
    const LinearOperator id = LinearOperator::dense(Matrix::Identity(3, 3));
    CHECK((apply(id, vec({1, 2, 3})) - vec({1, 2, 3})).norm() == 0.0);

    const LinearOperator d = LinearOperator::difference_1d(4);
    CHECK(apply(d, vec({1, 1, 1, 1})).cwiseAbs().maxCoeff() == 0.0);
    const Vector got = apply(d, vec({0, 1, 3, 6}));
    CHECK((got - vec({1, 2, 3})).norm() == 0.0);
    CHECK((got - oracle::difference_matrix(4) * vec({0, 1, 3, 6})).norm() == 0.0);
  }

  TEST_CASE("adjoint on identity and difference-1d") {
    const LinearOperator id = LinearOperator::dense(Matrix::Identity(2, 2));
    CHECK((adjoint_apply(id, vec({1, 2})) - vec({1, 2})).norm() == 0.0);
    const LinearOperator d = LinearOperator::difference_1d(3);
    CHECK((adjoint_apply(d, vec({1, 0})) - vec({-1, 1, 0})).norm() == 0.0);
    CHECK((adjoint_apply(d, vec({1, 0})) - oracle::difference_matrix(3).transpose() * vec({1, 0}))
              .norm() == 0.0);
  }

  TEST_CASE("random dense 5x7 inner-product identity") {
    std::mt19937_64 rng(5);
    const LinearOperator op = LinearOperator::dense(oracle::random_matrix(5, 7, rng));
    const Vector x = oracle::random_vector(7, rng), p = oracle::random_vector(5, rng);
    CHECK(std::abs(op.apply(x).dot(p) - x.dot(op.adjoint(p))) <= 1e-10);
  }

  TEST_CASE("dimension mismatch names expected and actual") {
    const LinearOperator d = LinearOperator::difference_1d(4);
    try {
      apply(d, Vector::Zero(3));
      FAIL("no error");
    } catch (const DimensionError& e) {
      CHECK(e.expected() == 4);
      CHECK(e.actual() == 3);
    }
    CHECK_THROWS_AS(adjoint_apply(d, Vector::Zero(4)), DimensionError);
  }

  TEST_CASE("operator norms") {
    CHECK(operator_norm(LinearOperator::identity(5)) == doctest::Approx(1.0));
    CHECK(operator_norm(LinearOperator::identity(5, -1.0)) == doctest::Approx(1.0));
    const double expected = 2.0 * std::sin(3.0 * std::numbers::pi / 8.0);
    const double svd = Eigen::JacobiSVD<Matrix>(oracle::difference_matrix(4)).singularValues()(0);
    CHECK(std::abs(svd - expected) <= 1e-12);
    CHECK(std::abs(operator_norm(LinearOperator::difference_1d(4)) - svd) <= 1e-10);
    CHECK(std::abs(operator_norm(LinearOperator::difference_1d(4)) - 1.8478) <= 1e-4);
    CHECK_THROWS_AS(operator_norm(LinearOperator::identity(2), 0.0), ParameterError);
  }

  TEST_CASE("smallest positive singular value") {
    CHECK(smallest_positive_singular_value(LinearOperator::identity(6)) == doctest::Approx(1.0));
    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 2.0;
    CHECK(smallest_positive_singular_value(LinearOperator::dense(diag)) == doctest::Approx(2.0));
    const Vector sv = Eigen::JacobiSVD<Matrix>(oracle::difference_matrix(4)).singularValues();
    const double expected = 2.0 * std::sin(std::numbers::pi / 8.0);
    CHECK(std::abs(sv(sv.size() - 1) - expected) <= 1e-12);
    CHECK(std::abs(smallest_positive_singular_value(LinearOperator::difference_1d(4)) - expected) <=
          1e-12);
    CHECK(std::abs(expected - 0.7654) <= 1e-4);
    CHECK_THROWS_AS(smallest_positive_singular_value(LinearOperator::dense(Matrix::Zero(3, 2))),
                    ParameterError);
    CHECK_THROWS_AS(smallest_positive_singular_value(LinearOperator::identity(3, 0.0)),
                    ParameterError);
  }

  TEST_CASE("build_operator descriptors") {
    OperatorDescriptor d;
    d.kind = OperatorKind::difference_2d;
    d.rows = 3;
    d.cols = 3;
    const LinearOperator t = build_operator(d);
    CHECK(t.in_dim() == 9);
    CHECK(t.out_dim() == 12);

    OperatorDescriptor one;
    one.kind = OperatorKind::dense;
    one.matrix = Matrix::Ones(1, 1);
    const LinearOperator id = build_operator(one);
    CHECK(id.in_dim() == 1);
    CHECK(id.apply(vec({4.5}))[0] == 4.5);

    OperatorDescriptor conv;
    conv.kind = OperatorKind::convolution_2d;
    conv.rows = 5;
    conv.cols = 4;
    conv.kernel = Matrix::Zero(3, 3);
    conv.kernel(1, 1) = 1.0;
    std::mt19937_64 rng(1);
    const Vector img = oracle::random_vector(20, rng);
    CHECK((build_operator(conv).apply(img) - img).norm() <= 1e-14);

    CHECK_THROWS_AS(operator_kind_from_string("sparse"), ParameterError);
    CHECK(operator_kind_from_string("difference-2d") == OperatorKind::difference_2d);
    OperatorDescriptor bad = d;
    bad.rows = 0;
    CHECK_THROWS_AS(build_operator(bad), ParameterError);
    OperatorDescriptor even = conv;
    even.kernel = Matrix::Ones(2, 2);
    CHECK_THROWS_AS(build_operator(even), ParameterError);
    OperatorDescriptor neg;
    neg.kind = OperatorKind::difference_1d;
    neg.size = -2;
    CHECK_THROWS_AS(build_operator(neg), ParameterError);
  }

  TEST_CASE("adjoint consistency on 100 random pairs for every operator") {
    std::mt19937_64 rng(2024);
    for (const LinearOperator& op : shipped_operators(rng)) {
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        const Vector x = oracle::random_vector(op.in_dim(), rng);
        const Vector p = oracle::random_vector(op.out_dim(), rng);
        const double lhs = op.apply(x).dot(p);
        worst = std::max(worst, std::abs(lhs - x.dot(op.adjoint(p))) / (1.0 + std::abs(lhs)));
      }
      INFO(to_string(op.kind()));
      CHECK(worst <= 1e-10);
    }
  }

  TEST_CASE("apply is linear") {
    std::mt19937_64 rng(77);
    for (const LinearOperator& op : shipped_operators(rng)) {
      const Vector x = oracle::random_vector(op.in_dim(), rng);
      const Vector y = oracle::random_vector(op.in_dim(), rng);
      const Vector lhs = op.apply(1.7 * x - 0.3 * y);
      const Vector rhs = 1.7 * op.apply(x) - 0.3 * op.apply(y);
      CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
  }

  TEST_CASE("norm dominates theta") {
    std::mt19937_64 rng(3);
    for (const LinearOperator& op : shipped_operators(rng))
      CHECK(operator_norm(op) >= smallest_positive_singular_value(op));
  }

  TEST_CASE("difference operators annihilate constants exactly") {
    CHECK(LinearOperator::difference_1d(17).apply(Vector::Constant(17, 3.25)).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(LinearOperator::difference_2d(13, 7)
              .apply(Vector::Constant(91, -0.7))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  TEST_CASE("structured operators match their dense forms") {
    for (auto [r, c] : {std::pair{3L, 3L}, {1L, 5L}, {6L, 1L}, {8L, 11L}, {16L, 16L}}) {
      if (r * c < 2) continue;
      const LinearOperator t = LinearOperator::difference_2d(r, c);
      CHECK((t.to_dense() - oracle::difference_2d_matrix(r, c)).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK((LinearOperator::difference_1d(9).to_dense() - oracle::difference_matrix(9))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    Matrix k(3, 5);
    k << 0.1, 0.2, 0.3, 0.2, 0.1, 0.0, 1.0, -0.5, 0.25, 0.0, 0.3, 0.1, 0.1, 0.1, 0.3;
    for (auto [r, c] : {std::pair{5L, 7L}, {12L, 9L}, {20L, 20L}}) {
      const LinearOperator conv = LinearOperator::convolution_2d(r, c, k);
      CHECK((conv.to_dense() - oracle::convolution_matrix(r, c, k)).cwiseAbs().maxCoeff() <= 1e-13);
    }
    // 64 x 64 grids, checked through random probes instead of a full matrix.
    std::mt19937_64 rng(9);
    const Matrix g = gaussian_kernel(9, 2.0);
    const LinearOperator conv = LinearOperator::convolution_2d(64, 64, g);
    const Vector x = oracle::random_vector(4096, rng);
    CHECK((conv.apply(x) - oracle::circular_convolve(x, 64, 64, g)).cwiseAbs().maxCoeff() <= 1e-13);
  }

  TEST_CASE("closed-form spectra agree with dense decompositions") {
    const Matrix t = oracle::difference_2d_matrix(7, 12);
    const Vector sv = Eigen::JacobiSVD<Matrix>(t).singularValues();
    const LinearOperator op = LinearOperator::difference_2d(7, 12);
    CHECK(std::abs(operator_norm(op) - sv(0)) <= 1e-10 * sv(0));
    double theta = sv(0);
    for (double v : sv)
      if (v > 1e-10 * sv(0)) theta = std::min(theta, v);
    CHECK(std::abs(smallest_positive_singular_value(op) - theta) <= 1e-10);

    const Matrix k = gaussian_kernel(5, 1.2);
    const Vector csv = Eigen::JacobiSVD<Matrix>(oracle::convolution_matrix(10, 8, k)).singularValues();
    const LinearOperator conv = LinearOperator::convolution_2d(10, 8, k);
    CHECK(std::abs(operator_norm(conv) - csv(0)) <= 1e-10);
    CHECK(std::abs(smallest_positive_singular_value(conv) - csv(csv.size() - 1)) <= 1e-10);
  }

  TEST_CASE("power iteration matches the closed form") {
    const LinearOperator t = LinearOperator::difference_2d(20, 24);
    CHECK(std::abs(power_iteration_norm(t, 1e-12, 100000) - operator_norm(t)) <=
          1e-6 * operator_norm(t));
    const LinearOperator conv = LinearOperator::convolution_2d(16, 16, gaussian_kernel(5, 1.0));
    CHECK(std::abs(power_iteration_norm(conv) - operator_norm(conv)) <= 1e-6);
    CHECK_THROWS_AS(power_iteration_norm(t, 1e-15, 2), ConvergenceError);
  }

  TEST_CASE("dense operators beyond desk scale fall back to power iteration") {
    std::mt19937_64 rng(4);
    Matrix m = Matrix::Zero(4100, 3);
    m.topRows(3) = oracle::random_matrix(3, 3, rng);
    const double exact = Eigen::JacobiSVD<Matrix>(m.topRows(3)).singularValues()(0);
    // min(rows, cols) is 3, so this is still decomposed densely.
    CHECK(std::abs(operator_norm(LinearOperator::dense(m)) - exact) <= 1e-10 * exact);
  }

  TEST_CASE("constraint system checks dimensions") {
    CHECK_THROWS_AS(ConstraintSystem(LinearOperator::identity(3), LinearOperator::identity(2),
                                     Vector::Zero(3)),
                    DimensionError);
    CHECK_THROWS_AS(ConstraintSystem(LinearOperator::identity(3), LinearOperator::identity(3),
                                     Vector::Zero(2)),
                    DimensionError);
    ConstraintSystem cs(LinearOperator::identity(2), LinearOperator::identity(2, -1.0), vec({1, 1}));
    CHECK((cs.residual(vec({2, 3}), vec({1, 1})) - vec({0, 1})).norm() == 0.0);
  }
}
