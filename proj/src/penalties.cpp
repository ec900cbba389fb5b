#include "ilradmm/penalties.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ilradmm/error.hpp"

namespace ilradmm {

std::string to_string(OuterKind kind) {
  switch (kind) {
    case OuterKind::power: return "power";
    case OuterKind::log: return "log";
    case OuterKind::etp: return "etp";
    case OuterKind::geman: return "geman";
    case OuterKind::laplace: return "laplace";
  }
  return "unknown";
}

OuterKind outer_kind_from_string(const std::string& name) {
  for (auto k : {OuterKind::power, OuterKind::log, OuterKind::etp, OuterKind::geman,
                 OuterKind::laplace})
    if (to_string(k) == name) return k;
  throw ParameterError("unknown outer penalty kind '" + name + "'");
}

std::string to_string(InnerKind kind) { return kind == InnerKind::abs ? "abs" : "square"; }

InnerKind inner_kind_from_string(const std::string& name) {
  if (name == "abs") return InnerKind::abs;
  if (name == "square") return InnerKind::square;
  throw ParameterError("unknown inner function kind '" + name + "'");
}

namespace {

void check_scale(double scale) {
  if (!(scale >= 0) || !std::isfinite(scale))
    throw ParameterError("penalty scale must be finite and non-negative");
}

void check_shape(double gamma) {
  if (!(gamma > 0) || !std::isfinite(gamma))
    throw ParameterError("penalty shape parameter must be positive");
}

}  // namespace

ConcaveOuter ConcaveOuter::power(double q, double epsilon, double scale) {
  if (!(q > 0 && q <= 1)) throw ParameterError("power penalty: q must lie in (0, 1]");
  if (!(epsilon >= 0) || !std::isfinite(epsilon))
    throw ParameterError("power penalty: epsilon must be non-negative");
  check_scale(scale);
  return {OuterKind::power, q, epsilon, 1.0, scale};
}

ConcaveOuter ConcaveOuter::log(double epsilon, double scale) {
  if (!(epsilon > 0) || !std::isfinite(epsilon))
    throw ParameterError("log penalty: epsilon must be positive");
  check_scale(scale);
  return {OuterKind::log, 1.0, epsilon, 1.0, scale};
}

ConcaveOuter ConcaveOuter::etp(double gamma, double scale) {
  check_shape(gamma);
  check_scale(scale);
  return {OuterKind::etp, 1.0, 0.0, gamma, scale};
}

ConcaveOuter ConcaveOuter::geman(double gamma, double scale) {
  check_shape(gamma);
  check_scale(scale);
  return {OuterKind::geman, 1.0, 0.0, gamma, scale};
}

ConcaveOuter ConcaveOuter::laplace(double gamma, double scale) {
  check_shape(gamma);
  check_scale(scale);
  return {OuterKind::laplace, 1.0, 0.0, gamma, scale};
}

std::optional<double> ConcaveOuter::lipschitz_constant() const {
  if (kind != OuterKind::power) return std::nullopt;
  if (q == 1.0) return 0.0;
  if (epsilon <= 0) return std::nullopt;
  return scale * q * (1.0 - q) * std::pow(epsilon, q - 2.0);
}

double inner_value(const InnerConvex& h, double t) {
  return h.kind == InnerKind::abs ? std::abs(t) : t * t;
}

namespace {

void check_domain(double s) {
  if (!(s >= 0)) throw DomainError("outer penalty evaluated at negative argument");
}

// Unscaled g~ and its derivatives.
double base_value(const ConcaveOuter& g, double s) {
  switch (g.kind) {
    case OuterKind::power: return std::pow(s + g.epsilon, g.q);
    case OuterKind::log: return std::log1p(s / g.epsilon);
    case OuterKind::etp: return -std::expm1(-g.shape * s) / -std::expm1(-g.shape);
    case OuterKind::geman: return s / (s + g.shape);
    case OuterKind::laplace: return -std::expm1(-s / g.shape);
  }
  return 0.0;
}

double base_derivative(const ConcaveOuter& g, double s) {
  switch (g.kind) {
    case OuterKind::power:
      if (g.q == 1.0) return 1.0;
      return g.q * std::pow(s + g.epsilon, g.q - 1.0);
    case OuterKind::log: return 1.0 / (s + g.epsilon);
    case OuterKind::etp: return g.shape * std::exp(-g.shape * s) / -std::expm1(-g.shape);
    case OuterKind::geman: return g.shape / ((s + g.shape) * (s + g.shape));
    case OuterKind::laplace: return std::exp(-s / g.shape) / g.shape;
  }
  return 0.0;
}

double base_second_derivative(const ConcaveOuter& g, double s) {
  switch (g.kind) {
    case OuterKind::power:
      if (g.q == 1.0) return 0.0;
      return g.q * (g.q - 1.0) * std::pow(s + g.epsilon, g.q - 2.0);
    case OuterKind::log: return -1.0 / ((s + g.epsilon) * (s + g.epsilon));
    case OuterKind::etp:
      return -g.shape * g.shape * std::exp(-g.shape * s) / -std::expm1(-g.shape);
    case OuterKind::geman: return -2.0 * g.shape / std::pow(s + g.shape, 3);
    case OuterKind::laplace: return -std::exp(-s / g.shape) / (g.shape * g.shape);
  }
  return 0.0;
}

bool singular_at_zero(const ConcaveOuter& g) {
  return g.kind == OuterKind::power && g.epsilon == 0.0 && g.q < 1.0;
}

}  // namespace

double outer_value(const ConcaveOuter& g, double s) {
  check_domain(s);
  return g.scale * base_value(g, s);
}

double outer_derivative(const ConcaveOuter& g, double s) {
  check_domain(s);
  if (s == 0.0 && singular_at_zero(g))
    throw DomainError("power penalty with epsilon = 0 is not differentiable at 0; use epsilon > 0");
  return g.scale * base_derivative(g, s);
}

double outer_second_derivative(const ConcaveOuter& g, double s) {
  check_domain(s);
  if (s == 0.0 && singular_at_zero(g))
    throw DomainError("power penalty with epsilon = 0 is not twice differentiable at 0");
  return g.scale * base_second_derivative(g, s);
}

double penalty_value(const ConcaveOuter& g, const InnerConvex& h, const Vector& y) {
  double sum = 0.0;
  for (double v : y) sum += outer_value(g, inner_value(h, v));
  return sum;
}

WeightVector compute_weights(const ConcaveOuter& g, const InnerConvex& h, const Vector& y) {
  WeightVector out;
  out.w.resize(y.size());
  for (long i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw DomainError("compute_weights: non-finite entry");
    double w = outer_derivative(g, inner_value(h, y[i]));
    if (!(w >= kWeightFloor)) {
      w = kWeightFloor;
      ++out.clamped;
    }
    out.w[i] = w;
  }
  return out;
}

double prox_weighted_inner(const InnerConvex& h, double w, double r, double v) {
  if (!(r > 0)) throw ParameterError("prox_weighted_inner: r must be positive");
  if (!(w >= 0)) throw ParameterError("prox_weighted_inner: weight must be non-negative");
  const double lambda = w / r;
  if (h.kind == InnerKind::abs) {
    const double mag = std::abs(v) - lambda;
    return mag > 0 ? std::copysign(mag, v) : 0.0;
  }
  return v / (1.0 + 2.0 * lambda);
}

namespace {

std::string bracket_state(double lo, double hi, double t) {
  std::ostringstream os;
  os.precision(17);
  os << " [bracket lo=" << lo << " hi=" << hi << " last=" << t << "]";
  return os.str();
}

// Largest stationary point in (0, a] of psi(t) = g(t) + alpha/2 (t - a)^2,
// or nothing. psi' is convex on (0, a] for every shipped kind (g''' >= 0),
// so Newton started at a, where psi' > 0, descends monotonically onto the
// largest root; each tangent step certifies psi' > 0 on the interval it
// skips.
std::optional<double> abs_branch_root(const ConcaveOuter& g, double alpha, double a) {
  auto d1 = [&](double t) { return g.scale * base_derivative(g, t) + alpha * (t - a); };
  auto d2 = [&](double t) { return g.scale * base_second_derivative(g, t) + alpha; };
  double hi = a;
  double t = a;
  for (int it = 0; it < 500; ++it) {
    const double slope = d1(t);
    if (slope <= 0.0) {
      // Roundoff stepped past the root: polish on the sign-change bracket.
      double lo = t;
      for (int b = 0; b < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++b) {
        const double mid = 0.5 * (lo + hi);
        (d1(mid) > 0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    const double curv = d2(t);
    if (!(curv > 0)) return std::nullopt;
    const double next = t - slope / curv;
    if (!(next > 0)) return std::nullopt;
    if (std::abs(next - t) <= 4e-16 * std::max(1.0, t)) return next;
    hi = t;
    t = next;
  }
  throw ConvergenceError("scalar_prox_composite: root finder did not converge" +
                         bracket_state(0.0, hi, t));
}

// Square inner function: psi(t) = g(t^2) + alpha/2 (t - a)^2 on [0, a].
// psi' need not be convex, so scan for sign changes and bisect each.
std::vector<double> square_branch_roots(const ConcaveOuter& g, double alpha, double a) {
  auto d1 = [&](double t) {
    return 2.0 * t * g.scale * base_derivative(g, t * t) + alpha * (t - a);
  };
  constexpr int kSamples = 512;
  std::vector<double> roots;
  double prev_t = 0.0, prev_v = d1(0.0);
  for (int s = 1; s <= kSamples; ++s) {
    const double t = a * s / kSamples;
    const double v = d1(t);
    if (prev_v < 0 && v >= 0) {
      double lo = prev_t, hi = t;
      for (int b = 0; b < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++b) {
        const double mid = 0.5 * (lo + hi);
        (d1(mid) >= 0 ? hi : lo) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev_v = v;
  }
  return roots;
}

}  // namespace

double scalar_prox_composite(const ConcaveOuter& g, const InnerConvex& h, double alpha,
                             double z) {
  if (!(alpha > 0)) throw ParameterError("scalar_prox_composite: alpha must be positive");
  if (!std::isfinite(z)) throw DomainError("scalar_prox_composite: non-finite argument");
  if (z == 0.0) return 0.0;
  if (g.scale == 0.0) return z;
  const double a = std::abs(z);

  // psi(t) - psi(0) on the branch t >= 0, written to avoid cancellation.
  auto gain = [&](double t) {
    const double outer = g.scale * (base_value(g, inner_value(h, t)) - base_value(g, 0.0));
    return outer + 0.5 * alpha * t * (t - 2.0 * a);
  };

  double best = 0.0;
  double best_gain = 0.0;
  if (h.kind == InnerKind::abs) {
    if (auto root = abs_branch_root(g, alpha, a)) {
      const double v = gain(*root);
      if (v < best_gain) {
        best = *root;
        best_gain = v;
      }
    }
  } else {
    for (double root : square_branch_roots(g, alpha, a)) {
      const double v = gain(root);
      if (v < best_gain || (v == best_gain && root < best)) {
        best = root;
        best_gain = v;
      }
    }
  }
  return std::copysign(best, z);
}

}  // namespace ilradmm
