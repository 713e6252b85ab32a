#include "relupgd/cone_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "relupgd/error.hpp"
#include "relupgd/rng.hpp"

namespace relupgd {

const char* to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::kFullSpace: return "none";
    case ConeKind::kSubspace: return "subspace";
    case ConeKind::kL1: return "l1";
    case ConeKind::kL2: return "l2";
    case ConeKind::kSparsity: return "sparsity";
  }
  return "unknown";
}

ConeKind parse_cone_kind(const std::string& text) {
  if (text == "none") return ConeKind::kFullSpace;
  if (text == "subspace") return ConeKind::kSubspace;
  if (text == "l1") return ConeKind::kL1;
  if (text == "l2") return ConeKind::kL2;
  if (text == "sparsity") return ConeKind::kSparsity;
  throw Error(ErrorCode::kConfigParse, "unknown cone kind '" + text + "'");
}

DescentConeDescriptor DescentConeDescriptor::at(ConeKind kind, const WeightVector& w_star) {
  if (w_star.dim() == 0) throw Error(ErrorCode::kInvalidParameter, "cone anchor needs d >= 1");
  DescentConeDescriptor cone;
  cone.kind = kind;
  cone.anchor = w_star;
  for (std::size_t i = 0; i < w_star.dim(); ++i) {
    if (w_star[i] != 0.0) {
      cone.support.push_back(i);
      cone.signs.push_back(sgn(w_star[i]));
    }
  }
  if (kind != ConeKind::kFullSpace && cone.support.empty()) {
    throw Error(ErrorCode::kZeroVector, "descent cone needs a nonzero anchor");
  }
  return cone;
}

DescentConeDescriptor DescentConeDescriptor::canonical(ConeKind kind, std::size_t d, std::size_t s) {
  if (d == 0 || s == 0 || s > d) throw Error(ErrorCode::kInvalidParameter, "need 1 <= s <= d");
  std::vector<double> entries(d, 0.0);
  const double value = 1.0 / std::sqrt(static_cast<double>(s));
  std::fill(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(s), value);
  return at(kind, WeightVector(std::move(entries)));
}

namespace {

double l1_polar_distance_sq(const DescentConeDescriptor& cone, std::span<const double> g) {
  const std::size_t d = cone.d();
  std::vector<bool> on_support(d, false);
  double sum_signed = 0.0;  // sum_T sgn_i g_i
  double sum_sq_support = 0.0;
  for (std::size_t k = 0; k < cone.support.size(); ++k) {
    const std::size_t i = cone.support[k];
    on_support[i] = true;
    sum_signed += cone.signs[k] * g[i];
    sum_sq_support += g[i] * g[i];
  }
  std::vector<double> off;
  off.reserve(d - cone.support.size());
  for (std::size_t i = 0; i < d; ++i) {
    if (!on_support[i]) off.push_back(std::abs(g[i]));
  }
  std::sort(off.begin(), off.end(), std::greater<>());

  // f'(t)/2 = s t - sum_T sgn_i g_i - sum_{|g_i| > t} (|g_i| - t). On the interval where exactly
  // the m largest off-support magnitudes exceed t, the root is
  //   t = (sum_signed + sum of those m) / (s + m).
  const double s = static_cast<double>(cone.support.size());
  double tail_sum = 0.0;
  double t = 0.0;
  std::size_t m = 0;
  for (;; ++m) {
    const double candidate = (sum_signed + tail_sum) / (s + static_cast<double>(m));
    const double upper = m == 0 ? std::numeric_limits<double>::infinity() : off[m - 1];
    const double lower = m < off.size() ? off[m] : 0.0;
    if (candidate >= lower && candidate <= upper) {
      t = candidate;
      break;
    }
    if (m == off.size()) {
      t = candidate;
      break;
    }
    tail_sum += off[m];
  }
  t = std::max(t, 0.0);

  double value = sum_sq_support - 2.0 * t * sum_signed + s * t * t;
  for (double a : off) {
    if (a <= t) break;
    value += (a - t) * (a - t);
  }
  return value;
}

}  // namespace

double polar_distance_sq(const DescentConeDescriptor& cone, std::span<const double> g) {
  if (g.size() != cone.d()) throw Error(ErrorCode::kDimensionMismatch, "sample dimension differs from cone");
  switch (cone.kind) {
    case ConeKind::kFullSpace: return dot(g, g);
    case ConeKind::kSubspace: {
      double acc = 0.0;
      for (std::size_t i : cone.support) acc += g[i] * g[i];
      return acc;
    }
    case ConeKind::kL1: return l1_polar_distance_sq(cone, g);
    case ConeKind::kL2:
    case ConeKind::kSparsity:
      throw Error(ErrorCode::kUnsupportedCone,
                  std::string("no Monte Carlo polar distance for the ") + to_string(cone.kind) + " cone");
  }
  return 0.0;
}

WidthEstimate estimate_width_mc(const DescentConeDescriptor& cone, std::size_t num_samples, std::uint64_t seed) {
  if (num_samples < 100) throw Error(ErrorCode::kInvalidParameter, "need at least 100 Monte Carlo samples");
  if (cone.kind == ConeKind::kL2 || cone.kind == ConeKind::kSparsity) {
    throw Error(ErrorCode::kUnsupportedCone,
                std::string("no Monte Carlo estimator for the ") + to_string(cone.kind) + " cone");
  }
  const std::size_t d = cone.d();
  std::vector<double> g(d);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < num_samples; ++k) {
    StreamRng rng(seed, k);
    for (double& v : g) v = rng.normal();
    const double x = polar_distance_sq(cone, g);
    sum += x;
    sum_sq += x * x;
  }
  const double count = static_cast<double>(num_samples);
  const double mean = sum / count;
  const double var = std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0));

  WidthEstimate est;
  est.omega_sq_mc = mean;
  est.stderr_mc = std::sqrt(var / count);
  est.num_samples = num_samples;
  est.seed = seed;
  switch (cone.kind) {
    case ConeKind::kFullSpace: est.omega_sq_analytic = static_cast<double>(d); break;
    case ConeKind::kSubspace: est.omega_sq_analytic = static_cast<double>(cone.s()); break;
    case ConeKind::kL1: est.omega_sq_analytic = width_analytic_l1(d, cone.s()); break;
    default: break;
  }
  est.n0 = std::clamp(mean, 0.0, static_cast<double>(d));
  return est;
}

double l1_width_objective(std::size_t d, std::size_t s, double t) {
  const double tail = 0.5 * std::erfc(t / std::numbers::sqrt2);
  const double density = std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
  const double excess = 2.0 * (1.0 + t * t) * tail - 2.0 * t * density;
  return static_cast<double>(s) * (1.0 + t * t) + static_cast<double>(d - s) * excess;
}

double width_analytic_l1(std::size_t d, std::size_t s) {
  if (s == 0 || s > d) throw Error(ErrorCode::kInvalidParameter, "need 1 <= s <= d");
  if (s == d) return static_cast<double>(d);
  double lo = 0.0;
  double hi = 10.0;
  while (hi - lo > 1e-8) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (l1_width_objective(d, s, m1) < l1_width_objective(d, s, m2)) hi = m2;
    else lo = m1;
  }
  return l1_width_objective(d, s, 0.5 * (lo + hi));
}

double phi_gamma(double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::kNonpositiveArgument, "phi_gamma needs t > 0");
  return std::numbers::sqrt2 * std::exp(std::lgamma(0.5 * (t + 1.0)) - std::lgamma(0.5 * t));
}

double minimal_samples(const DescentConeDescriptor& cone, WidthMethod method, std::uint64_t seed) {
  const auto d = static_cast<double>(cone.d());
  switch (cone.kind) {
    case ConeKind::kL2: return d;
    case ConeKind::kSparsity: return width_analytic_l1(cone.d(), cone.s());
    default: break;
  }
  if (method == WidthMethod::kMonteCarlo) return estimate_width_mc(cone, 100000, seed).n0;
  switch (cone.kind) {
    case ConeKind::kFullSpace: return d;
    case ConeKind::kSubspace: return static_cast<double>(cone.s());
    case ConeKind::kL1: return width_analytic_l1(cone.d(), cone.s());
    default: break;
  }
  return estimate_width_mc(cone, 100000, seed).n0;
}

}  // namespace relupgd
