#include "ilradmm/xupdate.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <optional>

#include "fft.hpp"
#include "ilradmm/error.hpp"

namespace ilradmm {
namespace {

constexpr long kDenseSolveDim = 1024;
constexpr double kSolveTol = 1e-10;

bool fourier_preconditionable(const ProblemSpec& problem) {
  if (!problem.loss.is_quadratic()) return false;
  const LinearOperator& a = problem.a();
  const LinearOperator& psi = problem.loss.psi();
  if (a.kind() != OperatorKind::difference_2d) return false;
  if (psi.kind() == OperatorKind::scaled_identity) return psi.in_dim() == a.in_dim();
  return psi.kind() == OperatorKind::convolution_2d && psi.grid_rows() == a.grid_rows() &&
         psi.grid_cols() == a.grid_cols();
}

}  // namespace

std::string to_string(XUpdater::Method method) {
  switch (method) {
    case XUpdater::Method::dense_cholesky: return "dense-cholesky";
    case XUpdater::Method::conjugate_gradient: return "conjugate-gradient";
    case XUpdater::Method::fourier_pcg: return "fourier-pcg";
    case XUpdater::Method::accelerated_gradient: return "accelerated-gradient";
  }
  return "unknown";
}

struct XUpdater::Cache {
  // dense_cholesky
  Matrix psi_gram;
  Matrix a_gram;
  std::optional<double> factored_alpha;
  Matrix system;  // psi_gram + factored_alpha * a_gram
  Eigen::LLT<Matrix> llt;
  int factorizations = 0;
  // fourier_pcg
  std::unique_ptr<detail::Fft2d> fft;
  Vector blur_power;  // |K^(w)|^2 over the half spectrum
  Vector laplacian;   // periodic Laplacian symbol over the half spectrum
};

XUpdater::XUpdater(const ProblemSpec& problem)
    : problem_(&problem), cache_(std::make_unique<Cache>()) {
  const double a_norm = operator_norm(problem.a());
  a_norm_sq_ = a_norm * a_norm;
  if (!problem.loss.is_quadratic()) {
    method_ = Method::accelerated_gradient;
  } else if (problem.x_dim() <= kDenseSolveDim) {
    method_ = Method::dense_cholesky;
    cache_->psi_gram = problem.loss.psi().gram();
    cache_->a_gram = problem.a().gram();
  } else if (fourier_preconditionable(problem)) {
    method_ = Method::fourier_pcg;
    const long rows = problem.a().grid_rows(), cols = problem.a().grid_cols();
    const long half = cols / 2 + 1;
    cache_->fft = std::make_unique<detail::Fft2d>(rows, cols);
    cache_->blur_power.resize(rows * half);
    cache_->laplacian.resize(rows * half);
    const LinearOperator& psi = problem.loss.psi();
    Vector mags;
    if (psi.kind() == OperatorKind::convolution_2d) mags = psi.convolution_spectrum();
    for (long i = 0; i < rows; ++i) {
      const double si = std::sin(std::numbers::pi * i / rows);
      for (long j = 0; j < half; ++j) {
        const double sj = std::sin(std::numbers::pi * j / cols);
        const double m = mags.size() ? mags[i * cols + j] : std::abs(psi.identity_scale());
        cache_->blur_power[i * half + j] = m * m;
        cache_->laplacian[i * half + j] =
            (rows > 1 ? 4.0 * si * si : 0.0) + (cols > 1 ? 4.0 * sj * sj : 0.0);
      }
    }
  } else {
    method_ = Method::conjugate_gradient;
  }
}

XUpdater::~XUpdater() = default;
XUpdater::XUpdater(XUpdater&&) noexcept = default;
XUpdater& XUpdater::operator=(XUpdater&&) noexcept = default;

int XUpdater::factorizations() const { return cache_->factorizations; }

double x_subproblem_residual(const ProblemSpec& problem, const Vector& x, const Vector& p,
                             const Vector& offset, double alpha) {
  const LinearOperator& a = problem.a();
  return (problem.loss.gradient(x) + a.adjoint(p + alpha * (a.apply(x) + offset))).norm();
}

Vector XUpdater::solve(const Vector& p, const Vector& offset, double alpha,
                       const Vector& warm_start) {
  const ProblemSpec& pr = *problem_;
  const LinearOperator& a = pr.a();
  require_dim("x_update: len(p)", pr.c_dim(), p.size());
  require_dim("x_update: len(offset)", pr.c_dim(), offset.size());
  require_dim("x_update: warm start", pr.x_dim(), warm_start.size());
  if (!(alpha > 0)) throw ParameterError("x_update: alpha must be positive");
  last_iterations_ = 0;

  if (method_ == Method::accelerated_gradient) {
    // Nesterov with gradient-based adaptive restart.
    const double step = 1.0 / (pr.loss.lipschitz() + alpha * a_norm_sq_);
    auto grad = [&](const Vector& x) {
      return Vector(pr.loss.gradient(x) + a.adjoint(p + alpha * (a.apply(x) + offset)));
    };
    Vector x = warm_start, x_prev = warm_start, v = warm_start;
    double t = 1.0;
    constexpr int kCap = 200000;
    for (int it = 0; it < kCap; ++it) {
      const Vector gx = grad(x);
      if (gx.norm() <= kSolveTol * (1.0 + x.norm())) {
        last_iterations_ = it;
        return x;
      }
      const Vector gv = grad(v);
      x_prev = x;
      x = v - step * gv;
      if (gv.dot(x - x_prev) > 0) {
        t = 1.0;
        v = x;
        continue;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      v = x + ((t - 1.0) / t_next) * (x - x_prev);
      t = t_next;
    }
    throw ConvergenceError("x_update: accelerated gradient hit the iteration cap; residual " +
                           std::to_string(grad(x).norm()));
  }

  const LinearOperator& psi = pr.loss.psi();
  const Vector rhs = psi.adjoint(pr.loss.data()) - a.adjoint(p + alpha * offset);

  if (method_ == Method::dense_cholesky) {
    Cache& c = *cache_;
    if (!c.factored_alpha || *c.factored_alpha != alpha) {
      c.system = c.psi_gram + alpha * c.a_gram;
      c.llt.compute(c.system);
      ++c.factorizations;
      if (c.llt.info() != Eigen::Success) {
        c.factored_alpha.reset();
        throw ConvergenceError("x_update: system matrix is not positive definite");
      }
      c.factored_alpha = alpha;
    }
    Vector x = c.llt.solve(rhs);
    // One step of iterative refinement.
    x += c.llt.solve(rhs - c.system * x);
    return x;
  }

  auto system = [&](const Vector& v) {
    return Vector(psi.adjoint(psi.apply(v)) + alpha * a.adjoint(a.apply(v)));
  };
  auto precondition = [&](const Vector& r) -> Vector {
    if (method_ != Method::fourier_pcg) return r;
    const Cache& c = *cache_;
    auto freq = c.fft->forward(r.data());
    for (size_t i = 0; i < freq.size(); ++i) {
      double d = c.blur_power[static_cast<long>(i)] + alpha * c.laplacian[static_cast<long>(i)];
      freq[i] /= (d > 1e-14 ? d : 1e-14);
    }
    Vector out(r.size());
    c.fft->inverse(std::move(freq), out.data());
    return out;
  };

  const long n = pr.x_dim();
  const int cap = static_cast<int>(std::min<long>(100000, 20 * n));
  Vector x = warm_start;
  int total = 0;
  for (int restart = 0; restart < 4; ++restart) {
    Vector r = rhs - system(x);
    if (r.norm() <= kSolveTol * (1.0 + x.norm())) break;
    Vector z = precondition(r);
    Vector d = z;
    double rz = r.dot(z);
    for (; total < cap; ++total) {
      const Vector hd = system(d);
      const double curvature = d.dot(hd);
      if (!(curvature > 0))
        throw ConvergenceError("x_update: conjugate gradient breakdown; residual " +
                               std::to_string(r.norm()));
      const double step = rz / curvature;
      x += step * d;
      r -= step * hd;
      if (r.norm() <= kSolveTol * (1.0 + x.norm())) break;
      z = precondition(r);
      const double rz_next = r.dot(z);
      d = z + (rz_next / rz) * d;
      rz = rz_next;
    }
    if (total >= cap) break;
  }
  last_iterations_ = total;
  const double true_residual = (rhs - system(x)).norm();
  if (!(true_residual <= 1e-8 * (1.0 + x.norm())))
    throw ConvergenceError("x_update: conjugate gradient did not converge; residual " +
                           std::to_string(true_residual));
  return x;
}

}  // namespace ilradmm
