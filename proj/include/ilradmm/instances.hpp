#pragma once

#include <cstdint>

#include "ilradmm/config.hpp"
#include "ilradmm/problem.hpp"

namespace ilradmm {

// Seeded dense test problem
//   f(x) = ||Psi x - b||^2 / 2,   A x - y = 0,   penalty over y,
// with Psi = s (I + psi_perturb G / sqrt(n)), A = [I 0] + a_perturb G' / sqrt(n)
// (m <= n, full row rank for small perturbations), and b generated from a
// sparse y_true through x_true = A^+ y_true plus noise.
struct DenseInstanceParams {
  long n = 20;  // dim(x)
  long m = 20;  // dim(y) = dim(c)
  std::uint64_t seed = 7;
  double psi_scale = 8.0;
  double psi_perturb = 0.05;
  double a_perturb = 0.1;
  long support = 5;
  double noise = 0.01;
  ConcaveOuter outer = ConcaveOuter::power(0.5, 1e-7, 0.5);
  InnerConvex inner = InnerConvex::abs();
};

struct Instance {
  ProblemSpec problem;
  Vector x_true;
  Vector y_true;
};

Instance make_dense_instance(const DenseInstanceParams& params);

// argmin f for a least-squares loss with full-column-rank Psi (desk scale).
Vector least_squares_minimizer(const ProblemSpec& problem);

// Rows separated by ';', entries by whitespace or ','.
Matrix parse_matrix(const std::string& text);
Vector parse_vector(const std::string& text);

ConcaveOuter outer_from_config(const KeyValueConfig& kv);

// Problem described by a key=value file. `instance = dense-random` uses the
// generator above (keys n, m, seed, psi-scale, psi-perturb, a-perturb,
// support, noise); `instance = explicit` reads A, B, c, Psi, b as matrices.
// Penalty keys: outer, q, epsilon, shape, sigma, inner; optional delta.
Instance instance_from_config(const KeyValueConfig& kv);

}  // namespace ilradmm
