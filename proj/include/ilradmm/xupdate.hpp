#pragma once

#include <memory>
#include <string>

#include "ilradmm/problem.hpp"

namespace ilradmm {

// Exact solver for the strongly convex x-subproblem
//
//   argmin_x  f(x) + <p, A x> + (alpha / 2) ||A x + offset||^2,   offset = B y - c.
//
// Least-squares losses reduce to (Psi^T Psi + alpha A^T A) x = rhs, solved by a
// cached Cholesky factorization at desk scale or by conjugate gradients
// (Fourier-preconditioned for convolution + difference-2d pairs). Other losses
// use accelerated gradient descent with restarts.
class XUpdater {
 public:
  enum class Method { dense_cholesky, conjugate_gradient, fourier_pcg, accelerated_gradient };

  explicit XUpdater(const ProblemSpec& problem);
  ~XUpdater();
  XUpdater(XUpdater&&) noexcept;
  XUpdater& operator=(XUpdater&&) noexcept;

  Vector solve(const Vector& p, const Vector& offset, double alpha, const Vector& warm_start);

  Method method() const { return method_; }
  // Iterations used by the last iterative solve (0 for Cholesky).
  int last_iterations() const { return last_iterations_; }

  // Number of times the dense system matrix has been factorized.
  int factorizations() const;

 private:
  struct Cache;
  const ProblemSpec* problem_;
  Method method_;
  double a_norm_sq_;
  int last_iterations_ = 0;
  std::unique_ptr<Cache> cache_;
};

std::string to_string(XUpdater::Method method);

// ||grad f(x) + A^T p + alpha A^T (A x + offset)||
double x_subproblem_residual(const ProblemSpec& problem, const Vector& x, const Vector& p,
                             const Vector& offset, double alpha);

}  // namespace ilradmm
