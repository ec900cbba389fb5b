#include "ilradmm/instances.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "ilradmm/error.hpp"

namespace ilradmm {

Instance make_dense_instance(const DenseInstanceParams& prm) {
  if (prm.n <= 0 || prm.m <= 0 || prm.m > prm.n)
    throw ParameterError("dense instance: need 0 < m <= n");
  if (prm.support < 0 || prm.support > prm.m)
    throw ParameterError("dense instance: support must lie in [0, m]");
  std::mt19937_64 rng(prm.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto gaussian = [&](long r, long c) {
    Matrix g(r, c);
    for (long j = 0; j < c; ++j)
      for (long i = 0; i < r; ++i) g(i, j) = gauss(rng);
    return g;
  };
  const double root_n = std::sqrt(static_cast<double>(prm.n));
  Matrix psi = prm.psi_scale *
               (Matrix::Identity(prm.n, prm.n) + prm.psi_perturb * gaussian(prm.n, prm.n) / root_n);
  Matrix a = Matrix::Identity(prm.m, prm.n) + prm.a_perturb * gaussian(prm.m, prm.n) / root_n;

  Vector y_true = Vector::Zero(prm.m);
  std::vector<long> idx(static_cast<size_t>(prm.m));
  for (long i = 0; i < prm.m; ++i) idx[static_cast<size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_real_distribution<double> mag(1.0, 3.0);
  for (long k = 0; k < prm.support; ++k) {
    const double sign = gauss(rng) < 0 ? -1.0 : 1.0;
    y_true[idx[static_cast<size_t>(k)]] = sign * mag(rng);
  }
  const Vector x_true = a.completeOrthogonalDecomposition().solve(y_true);
  Vector b = psi * x_true;
  for (long i = 0; i < b.size(); ++i) b[i] += prm.noise * gauss(rng);

  ConstraintSystem cs(LinearOperator::dense(a), LinearOperator::identity(prm.m, -1.0),
                      Vector::Zero(prm.m));
  return Instance{
      ProblemSpec(SmoothLoss::least_squares(LinearOperator::dense(psi), b), std::move(cs),
                  prm.outer, prm.inner),
      x_true, y_true};
}

Vector least_squares_minimizer(const ProblemSpec& problem) {
  const LinearOperator& psi = problem.loss.psi();
  if (psi.in_dim() > kDeskScaleDim)
    throw ParameterError("least_squares_minimizer: operator too large for a dense solve");
  const Eigen::LDLT<Matrix> ldlt(psi.gram());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw ConvergenceError("least_squares_minimizer: Psi^T Psi is not positive definite");
  return ldlt.solve(psi.adjoint(problem.loss.data()));
}

Matrix parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row_text;
  while (std::getline(all, row_text, ';')) {
    for (char& ch : row_text)
      if (ch == ',') ch = ' ';
    std::stringstream rs(row_text);
    std::vector<double> row;
    std::string tok;
    while (rs >> tok) {
      size_t used = 0;
      double v;
      try {
        v = std::stod(tok, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used != tok.size()) throw ParameterError("matrix: bad entry '" + tok + "'");
      row.push_back(v);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParameterError("matrix: no entries");
  Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw ParameterError("matrix: ragged rows");
    for (size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  }
  return m;
}

Vector parse_vector(const std::string& text) {
  const Matrix m = parse_matrix(text);
  if (m.rows() != 1 && m.cols() != 1) throw ParameterError("vector: expected one row or column");
  return m.rows() == 1 ? Vector(m.row(0).transpose()) : Vector(m.col(0));
}

ConcaveOuter outer_from_config(const KeyValueConfig& kv) {
  const OuterKind kind = outer_kind_from_string(kv.get_string("outer", "power"));
  const double sigma = kv.get_double("sigma", 1.0);
  switch (kind) {
    case OuterKind::power:
      return ConcaveOuter::power(kv.get_double("q", 0.5), kv.get_double("epsilon", 1e-7), sigma);
    case OuterKind::log: return ConcaveOuter::log(kv.get_double("epsilon", 1e-7), sigma);
    case OuterKind::etp: return ConcaveOuter::etp(kv.get_double("shape", 1.0), sigma);
    case OuterKind::geman: return ConcaveOuter::geman(kv.get_double("shape", 1.0), sigma);
    case OuterKind::laplace: return ConcaveOuter::laplace(kv.get_double("shape", 1.0), sigma);
  }
  throw ParameterError("unknown outer kind");
}

Instance instance_from_config(const KeyValueConfig& kv) {
  const std::string kind = kv.get_string("instance", "dense-random");
  const ConcaveOuter outer = outer_from_config(kv);
  const InnerConvex inner{inner_kind_from_string(kv.get_string("inner", "abs"))};
  std::optional<double> delta;
  if (kv.has("delta")) delta = kv.get_double("delta", 0.0);

  if (kind == "dense-random") {
    DenseInstanceParams p;
    p.n = kv.get_long("n", p.n);
    p.m = kv.get_long("m", p.m);
    p.seed = static_cast<std::uint64_t>(kv.get_long("seed", static_cast<long>(p.seed)));
    p.psi_scale = kv.get_double("psi-scale", p.psi_scale);
    p.psi_perturb = kv.get_double("psi-perturb", p.psi_perturb);
    p.a_perturb = kv.get_double("a-perturb", p.a_perturb);
    p.support = kv.get_long("support", p.support);
    p.noise = kv.get_double("noise", p.noise);
    p.outer = outer;
    p.inner = inner;
    Instance inst = make_dense_instance(p);
    if (delta) inst.problem.delta = delta;
    return inst;
  }
  if (kind == "explicit") {
    for (const char* key : {"A", "B", "c", "Psi", "b"})
      if (!kv.has(key)) throw ParameterError(std::string("explicit instance: missing key ") + key);
    LinearOperator a = LinearOperator::dense(parse_matrix(*kv.find("A")));
    LinearOperator b = LinearOperator::dense(parse_matrix(*kv.find("B")));
    LinearOperator psi = LinearOperator::dense(parse_matrix(*kv.find("Psi")));
    const long x_dim = psi.in_dim(), y_dim = b.in_dim();
    ConstraintSystem cs(std::move(a), std::move(b), parse_vector(*kv.find("c")));
    return Instance{ProblemSpec(SmoothLoss::least_squares(std::move(psi), parse_vector(*kv.find("b"))),
                                std::move(cs), outer, inner, delta),
                    Vector::Zero(x_dim), Vector::Zero(y_dim)};
  }
  throw ParameterError("unknown instance kind '" + kind + "' (expected dense-random or explicit)");
}

}  // namespace ilradmm
