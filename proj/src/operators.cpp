#include "ilradmm/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fft.hpp"
#include "ilradmm/error.hpp"

namespace ilradmm {

struct LinearOperator::Impl {
  OperatorKind kind = OperatorKind::dense;
  long in = 0;
  long out = 0;
  Matrix matrix;
  double scale = 1.0;
  long rows = 0;
  long cols = 0;
  Matrix kernel;
  std::shared_ptr<const detail::Fft2d> fft;
  std::vector<std::complex<double>> kernel_hat;
};

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::dense: return "dense";
    case OperatorKind::scaled_identity: return "scaled-identity";
    case OperatorKind::difference_1d: return "difference-1d";
    case OperatorKind::difference_2d: return "difference-2d";
    case OperatorKind::convolution_2d: return "convolution-2d";
  }
  return "unknown";
}

OperatorKind operator_kind_from_string(const std::string& name) {
  for (auto kind : {OperatorKind::dense, OperatorKind::scaled_identity,
                    OperatorKind::difference_1d, OperatorKind::difference_2d,
                    OperatorKind::convolution_2d}) {
    if (to_string(kind) == name) return kind;
  }
  throw ParameterError("unknown operator kind '" + name + "'");
}

LinearOperator::LinearOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

LinearOperator LinearOperator::dense(Matrix matrix) {
  if (matrix.rows() <= 0 || matrix.cols() <= 0)
    throw ParameterError("dense operator: empty matrix");
  if (!matrix.allFinite()) throw ParameterError("dense operator: non-finite entries");
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::dense;
  impl->in = matrix.cols();
  impl->out = matrix.rows();
  impl->matrix = std::move(matrix);
  return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::identity(long n, double scale) {
  if (n <= 0) throw ParameterError("identity operator: non-positive size");
  if (!std::isfinite(scale)) throw ParameterError("identity operator: non-finite scale");
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::scaled_identity;
  impl->in = impl->out = n;
  impl->scale = scale;
  return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::difference_1d(long n) {
  if (n < 2) throw ParameterError("difference-1d: length must be at least 2");
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::difference_1d;
  impl->in = n;
  impl->out = n - 1;
  return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::difference_2d(long rows, long cols) {
  if (rows <= 0 || cols <= 0) throw ParameterError("difference-2d: non-positive grid shape");
  const long out = rows * (cols - 1) + (rows - 1) * cols;
  if (out <= 0) throw ParameterError("difference-2d: 1x1 grid has no differences");
  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::difference_2d;
  impl->rows = rows;
  impl->cols = cols;
  impl->in = rows * cols;
  impl->out = out;
  return LinearOperator(std::move(impl));
}

LinearOperator LinearOperator::convolution_2d(long rows, long cols, const Matrix& kernel) {
  if (rows <= 0 || cols <= 0) throw ParameterError("convolution-2d: non-positive grid shape");
  if (kernel.rows() <= 0 || kernel.cols() <= 0)
    throw ParameterError("convolution-2d: empty kernel");
  if (kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0)
    throw ParameterError("convolution-2d: kernel dimensions must be odd");
  if (kernel.rows() > rows || kernel.cols() > cols)
    throw ParameterError("convolution-2d: kernel larger than the grid");
  if (!kernel.allFinite()) throw ParameterError("convolution-2d: non-finite kernel");

  auto impl = std::make_shared<Impl>();
  impl->kind = OperatorKind::convolution_2d;
  impl->rows = rows;
  impl->cols = cols;
  impl->in = impl->out = rows * cols;
  impl->kernel = kernel;
  impl->fft = std::make_shared<detail::Fft2d>(rows, cols);

  // Wrap the centered kernel so its center lands on pixel (0, 0).
  std::vector<double> wrapped(static_cast<size_t>(rows * cols), 0.0);
  const long ch = kernel.rows() / 2;
  const long cw = kernel.cols() / 2;
  for (long a = 0; a < kernel.rows(); ++a) {
    for (long b = 0; b < kernel.cols(); ++b) {
      const long i = ((a - ch) % rows + rows) % rows;
      const long j = ((b - cw) % cols + cols) % cols;
      wrapped[static_cast<size_t>(i * cols + j)] += kernel(a, b);
    }
  }
  impl->kernel_hat = impl->fft->forward(wrapped.data());
  return LinearOperator(std::move(impl));
}

long LinearOperator::in_dim() const { return impl_->in; }
long LinearOperator::out_dim() const { return impl_->out; }
OperatorKind LinearOperator::kind() const { return impl_->kind; }

namespace {

Vector convolve(const LinearOperator::Impl& op, const Vector& x, bool conjugate) {
  auto freq = op.fft->forward(x.data());
  for (size_t i = 0; i < freq.size(); ++i)
    freq[i] *= conjugate ? std::conj(op.kernel_hat[i]) : op.kernel_hat[i];
  Vector out(op.in);
  op.fft->inverse(std::move(freq), out.data());
  return out;
}

}  // namespace

Vector LinearOperator::apply(const Vector& x) const {
  require_dim("LinearOperator::apply", impl_->in, x.size());
  const Impl& op = *impl_;
  switch (op.kind) {
    case OperatorKind::dense:
      return op.matrix * x;
    case OperatorKind::scaled_identity:
      return op.scale * x;
    case OperatorKind::difference_1d:
      return x.tail(op.in - 1) - x.head(op.in - 1);
    case OperatorKind::difference_2d: {
      Vector out(op.out);
      long k = 0;
      for (long i = 0; i < op.rows; ++i)
        for (long j = 0; j + 1 < op.cols; ++j)
          out[k++] = x[i * op.cols + j + 1] - x[i * op.cols + j];
      for (long i = 0; i + 1 < op.rows; ++i)
        for (long j = 0; j < op.cols; ++j)
          out[k++] = x[(i + 1) * op.cols + j] - x[i * op.cols + j];
      return out;
    }
    case OperatorKind::convolution_2d:
      return convolve(op, x, false);
  }
  throw Error("LinearOperator::apply: unknown kind");
}

Vector LinearOperator::adjoint(const Vector& p) const {
  require_dim("LinearOperator::adjoint", impl_->out, p.size());
  const Impl& op = *impl_;
  switch (op.kind) {
    case OperatorKind::dense:
      return op.matrix.transpose() * p;
    case OperatorKind::scaled_identity:
      return op.scale * p;
    case OperatorKind::difference_1d: {
      Vector out = Vector::Zero(op.in);
      out.tail(op.in - 1) += p;
      out.head(op.in - 1) -= p;
      return out;
    }
    case OperatorKind::difference_2d: {
      Vector out = Vector::Zero(op.in);
      long k = 0;
      for (long i = 0; i < op.rows; ++i) {
        for (long j = 0; j + 1 < op.cols; ++j, ++k) {
          out[i * op.cols + j + 1] += p[k];
          out[i * op.cols + j] -= p[k];
        }
      }
      for (long i = 0; i + 1 < op.rows; ++i) {
        for (long j = 0; j < op.cols; ++j, ++k) {
          out[(i + 1) * op.cols + j] += p[k];
          out[i * op.cols + j] -= p[k];
        }
      }
      return out;
    }
    case OperatorKind::convolution_2d:
      return convolve(op, p, true);
  }
  throw Error("LinearOperator::adjoint: unknown kind");
}

Matrix LinearOperator::to_dense() const {
  if (impl_->kind == OperatorKind::dense) return impl_->matrix;
  Matrix m(impl_->out, impl_->in);
  Vector e = Vector::Zero(impl_->in);
  for (long j = 0; j < impl_->in; ++j) {
    e[j] = 1.0;
    m.col(j) = apply(e);
    e[j] = 0.0;
  }
  return m;
}

Matrix LinearOperator::gram() const {
  if (impl_->kind == OperatorKind::dense) return impl_->matrix.transpose() * impl_->matrix;
  Matrix g(impl_->in, impl_->in);
  Vector e = Vector::Zero(impl_->in);
  for (long j = 0; j < impl_->in; ++j) {
    e[j] = 1.0;
    g.col(j) = adjoint(apply(e));
    e[j] = 0.0;
  }
  // Symmetrize away roundoff from the FFT path.
  return 0.5 * (g + g.transpose());
}

const Matrix& LinearOperator::dense_matrix() const {
  if (impl_->kind != OperatorKind::dense) throw ParameterError("operator is not dense");
  return impl_->matrix;
}

double LinearOperator::identity_scale() const {
  if (impl_->kind != OperatorKind::scaled_identity)
    throw ParameterError("operator is not a scaled identity");
  return impl_->scale;
}

long LinearOperator::grid_rows() const {
  if (impl_->kind != OperatorKind::difference_2d && impl_->kind != OperatorKind::convolution_2d)
    throw ParameterError("operator has no grid shape");
  return impl_->rows;
}

long LinearOperator::grid_cols() const {
  if (impl_->kind != OperatorKind::difference_2d && impl_->kind != OperatorKind::convolution_2d)
    throw ParameterError("operator has no grid shape");
  return impl_->cols;
}

const Matrix& LinearOperator::kernel() const {
  if (impl_->kind != OperatorKind::convolution_2d)
    throw ParameterError("operator is not a convolution");
  return impl_->kernel;
}

Vector LinearOperator::convolution_spectrum() const {
  if (impl_->kind != OperatorKind::convolution_2d)
    throw ParameterError("operator is not a convolution");
  const long rows = impl_->rows, cols = impl_->cols, half = cols / 2 + 1;
  Vector mags(rows * cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      // Hermitian symmetry fills the missing half.
      const bool stored = j < half;
      const long si = stored ? i : (rows - i) % rows;
      const long sj = stored ? j : cols - j;
      mags[i * cols + j] = std::abs(impl_->kernel_hat[static_cast<size_t>(si * half + sj)]);
    }
  }
  return mags;
}

LinearOperator build_operator(const OperatorDescriptor& d) {
  switch (d.kind) {
    case OperatorKind::dense: return LinearOperator::dense(d.matrix);
    case OperatorKind::scaled_identity: return LinearOperator::identity(d.size, d.scale);
    case OperatorKind::difference_1d: return LinearOperator::difference_1d(d.size);
    case OperatorKind::difference_2d: return LinearOperator::difference_2d(d.rows, d.cols);
    case OperatorKind::convolution_2d:
      return LinearOperator::convolution_2d(d.rows, d.cols, d.kernel);
  }
  throw ParameterError("build_operator: unknown operator kind");
}

Vector apply(const LinearOperator& op, const Vector& x) { return op.apply(x); }
Vector adjoint_apply(const LinearOperator& op, const Vector& p) { return op.adjoint(p); }

namespace {

constexpr double kRankCutoff = 1e-10;

// Eigenvalues of D^T D for the (n-1) x n forward difference: 4 sin^2(pi k / 2n).
double difference_eigen(long n, long k) {
  const double s = std::sin(std::numbers::pi * static_cast<double>(k) / (2.0 * n));
  return 4.0 * s * s;
}

Vector dense_singular_values(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

bool dense_is_desk_scale(const Matrix& m) {
  return std::min(m.rows(), m.cols()) <= kDeskScaleDim;
}

}  // namespace

double power_iteration_norm(const LinearOperator& op, double tol, int max_iter,
                            std::uint64_t seed) {
  if (!(tol > 0)) throw ParameterError("power_iteration_norm: tol must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector x(op.in_dim());
  for (long i = 0; i < x.size(); ++i) x[i] = normal(rng);
  x.normalize();
  double lambda = op.apply(x).squaredNorm();
  for (int it = 0; it < max_iter; ++it) {
    Vector v = op.adjoint(op.apply(x));
    const double n = v.norm();
    if (n == 0.0) return 0.0;
    x = v / n;
    const double next = op.apply(x).squaredNorm();
    if (std::abs(next - lambda) <= tol * next) return std::sqrt(next);
    lambda = next;
  }
  throw ConvergenceError("power_iteration_norm: no convergence after " +
                         std::to_string(max_iter) + " iterations (estimate " +
                         std::to_string(std::sqrt(lambda)) + ")");
}

double operator_norm(const LinearOperator& op, double tol) {
  if (!(tol > 0)) throw ParameterError("operator_norm: tol must be positive");
  switch (op.kind()) {
    case OperatorKind::dense: {
      const Matrix& m = op.dense_matrix();
      if (dense_is_desk_scale(m)) return dense_singular_values(m)(0);
      return power_iteration_norm(op, tol);
    }
    case OperatorKind::scaled_identity:
      return std::abs(op.identity_scale());
    case OperatorKind::difference_1d:
      return std::sqrt(difference_eigen(op.in_dim(), op.in_dim() - 1));
    case OperatorKind::difference_2d: {
      const long m = op.grid_rows(), n = op.grid_cols();
      return std::sqrt(difference_eigen(m, m - 1) + difference_eigen(n, n - 1));
    }
    case OperatorKind::convolution_2d:
      return op.convolution_spectrum().maxCoeff();
  }
  throw Error("operator_norm: unknown kind");
}

double smallest_positive_singular_value(const LinearOperator& op) {
  auto smallest_above_cutoff = [](const Vector& values) {
    const double top = values.maxCoeff();
    if (!(top > 0)) throw ParameterError("smallest_positive_singular_value: zero operator");
    double best = top;
    for (double v : values)
      if (v > kRankCutoff * top) best = std::min(best, v);
    return best;
  };
  switch (op.kind()) {
    case OperatorKind::dense: {
      const Matrix& m = op.dense_matrix();
      if (!dense_is_desk_scale(m))
        throw ParameterError("smallest_positive_singular_value: dense operator too large");
      return smallest_above_cutoff(dense_singular_values(m));
    }
    case OperatorKind::scaled_identity:
      if (op.identity_scale() == 0.0)
        throw ParameterError("smallest_positive_singular_value: zero operator");
      return std::abs(op.identity_scale());
    case OperatorKind::difference_1d:
      return std::sqrt(difference_eigen(op.in_dim(), 1));
    case OperatorKind::difference_2d: {
      const long n = std::max(op.grid_rows(), op.grid_cols());
      return std::sqrt(difference_eigen(n, 1));
    }
    case OperatorKind::convolution_2d:
      return smallest_above_cutoff(op.convolution_spectrum());
  }
  throw Error("smallest_positive_singular_value: unknown kind");
}

long numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  const Vector s = dense_singular_values(m);
  if (s.size() == 0 || !(s(0) > 0)) return 0;
  long rank = 0;
  for (double v : s)
    if (v > kRankCutoff * s(0)) ++rank;
  return rank;
}

ConstraintSystem::ConstraintSystem(LinearOperator a, LinearOperator b, Vector c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  require_dim("ConstraintSystem: B.out_dim vs A.out_dim", a_.out_dim(), b_.out_dim());
  require_dim("ConstraintSystem: len(c) vs A.out_dim", a_.out_dim(), c_.size());
}

Vector ConstraintSystem::residual(const Vector& x, const Vector& y) const {
  return a_.apply(x) + b_.apply(y) - c_;
}

}  // namespace ilradmm
