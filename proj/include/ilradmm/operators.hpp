#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>

namespace ilradmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Operators whose Gram matrix fits this many columns are decomposed densely
// when exact spectral quantities are needed.
inline constexpr long kDeskScaleDim = 4096;

enum class OperatorKind {
  dense,
  scaled_identity,
  difference_1d,
  difference_2d,
  convolution_2d,
};

std::string to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& name);

// Plain-data description of an operator, validated by build_operator().
struct OperatorDescriptor {
  OperatorKind kind = OperatorKind::dense;
  Matrix matrix;       // dense
  long size = 0;       // difference_1d length, scaled_identity size
  long rows = 0;       // grid height (difference_2d, convolution_2d)
  long cols = 0;       // grid width
  Matrix kernel;       // convolution_2d, odd x odd, centered
  double scale = 1.0;  // scaled_identity
};

// Immutable linear map R^in_dim -> R^out_dim with an exact adjoint.
//
// Grid-shaped operators act on row-major images: pixel (i, j) of an
// rows x cols grid lives at index i * cols + j. difference_2d emits all
// horizontal differences x(i,j+1)-x(i,j) (row-major, rows*(cols-1) entries)
// followed by all vertical differences x(i+1,j)-x(i,j) ((rows-1)*cols
// entries). convolution_2d uses periodic boundaries.
class LinearOperator {
 public:
  static LinearOperator dense(Matrix matrix);
  static LinearOperator identity(long n, double scale = 1.0);
  static LinearOperator difference_1d(long n);
  static LinearOperator difference_2d(long rows, long cols);
  static LinearOperator convolution_2d(long rows, long cols, const Matrix& kernel);

  long in_dim() const;
  long out_dim() const;
  OperatorKind kind() const;

  Vector apply(const Vector& x) const;
  Vector adjoint(const Vector& p) const;

  // Materialized out_dim x in_dim matrix.
  Matrix to_dense() const;
  // Op^T Op as a dense in_dim x in_dim matrix, assembled column by column.
  Matrix gram() const;

  // Kind-specific payload; valid only for the matching kind.
  const Matrix& dense_matrix() const;
  double identity_scale() const;
  long grid_rows() const;
  long grid_cols() const;
  const Matrix& kernel() const;

  // Singular values of a convolution_2d operator (|DFT of the wrapped
  // kernel|), row-major over the frequency grid.
  Vector convolution_spectrum() const;

  struct Impl;

 private:
  explicit LinearOperator(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

LinearOperator build_operator(const OperatorDescriptor& descriptor);

Vector apply(const LinearOperator& op, const Vector& x);
Vector adjoint_apply(const LinearOperator& op, const Vector& p);

// ||Op||_2. Closed forms for structured kinds, dense SVD for dense
// matrices at desk scale, power iteration otherwise.
double operator_norm(const LinearOperator& op, double tol = 1e-8);

// ||Op||_2 by power iteration on Op^T Op. Stops when the Rayleigh quotient
// changes by at most tol (relative). Throws ConvergenceError past max_iter.
double power_iteration_norm(const LinearOperator& op, double tol = 1e-8,
                            int max_iter = 10000, std::uint64_t seed = 0x5eed);

// theta: the smallest singular value above 1e-10 * sigma_max.
// Throws ParameterError for the zero operator.
double smallest_positive_singular_value(const LinearOperator& op);

// Numerical rank of a dense matrix with cutoff 1e-10 * sigma_max.
long numerical_rank(const Matrix& m);

class ConstraintSystem {
 public:
  ConstraintSystem(LinearOperator a, LinearOperator b, Vector c);

  const LinearOperator& a() const { return a_; }
  const LinearOperator& b() const { return b_; }
  const Vector& c() const { return c_; }

  // A x + B y - c
  Vector residual(const Vector& x, const Vector& y) const;

 private:
  LinearOperator a_;
  LinearOperator b_;
  Vector c_;
};

}  // namespace ilradmm
