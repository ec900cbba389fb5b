// Small hand-built problems shared by the unit and acceptance tests.
#pragma once

#include "ilradmm/problem.hpp"

namespace fixture {

using namespace ilradmm;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Matrix mat(long r, long c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

// f(x) = ||Psi x - b||^2 / 2,  A x + B y = c
inline ProblemSpec quadratic_problem(const Matrix& psi, const Vector& b, const Matrix& a,
                                     const Matrix& bm, const Vector& c, ConcaveOuter outer,
                                     InnerConvex inner = InnerConvex::abs()) {
  return ProblemSpec(SmoothLoss::least_squares(LinearOperator::dense(psi), b),
                     ConstraintSystem(LinearOperator::dense(a), LinearOperator::dense(bm), c),
                     outer, inner);
}

inline SolverState state_at(const Vector& x, const Vector& y, const Vector& p, double alpha,
                            double r, const ProblemSpec& pr) {
  SolverState s;
  s.x = x;
  s.y = y;
  s.p = p;
  s.alpha = alpha;
  s.r = r;
  s.weights = compute_weights(pr.outer, pr.inner, y);
  return s;
}

}  // namespace fixture
