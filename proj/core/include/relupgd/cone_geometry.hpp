#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relupgd/vector.hpp"

namespace relupgd {

/// Which descent cone is being described. kSubspace is the support-restricted model: the
/// coordinate subspace spanned by the support of w*.
enum class ConeKind { kFullSpace, kSubspace, kL1, kL2, kSparsity };

const char* to_string(ConeKind kind);
/// "none" | "subspace" | "l1" | "l2" | "sparsity".
ConeKind parse_cone_kind(const std::string& text);

/// Descent cone C_R(w*) of a regularizer at the anchor w*, with the support T and the sign
/// pattern of w* on T precomputed.
struct DescentConeDescriptor {
  ConeKind kind = ConeKind::kFullSpace;
  WeightVector anchor;
  std::vector<std::size_t> support;  // ascending
  std::vector<double> signs;         // sgn(w*_i) for i in support

  std::size_t d() const noexcept { return anchor.dim(); }
  std::size_t s() const noexcept { return support.size(); }

  /// Throws kZeroVector for ball/sparsity/subspace kinds anchored at w* = 0.
  static DescentConeDescriptor at(ConeKind kind, const WeightVector& w_star);
  /// Canonical anchor: the first s coordinates set to 1/sqrt(s). Only (d, s) and the sign pattern
  /// matter for the cone's geometry up to a coordinate permutation.
  static DescentConeDescriptor canonical(ConeKind kind, std::size_t d, std::size_t s);
};

struct WidthEstimate {
  double omega_sq_mc = 0.0;  // Monte Carlo mean of dist^2(g, polar cone)
  double stderr_mc = 0.0;
  std::optional<double> omega_sq_analytic;
  double n0 = 0.0;  // reported minimal-sample value, clamped to [0, d]
  std::size_t num_samples = 0;
  std::uint64_t seed = 0;
};

/// Squared distance from g to the polar of the cone (the per-sample statistical-dimension
/// integrand). For the l1 cone this is min_{t >= 0} sum_T (g_i - t sgn_i)^2 + sum_{T^c} (|g_i| - t)_+^2,
/// minimized exactly: the derivative is piecewise linear and increasing in t, so the root is
/// located between consecutive sorted breakpoints |g_i|, i not in T.
/// Throws kUnsupportedCone for the l2 and sparsity kinds.
double polar_distance_sq(const DescentConeDescriptor& cone, std::span<const double> g);

/// Monte Carlo statistical dimension: g ~ N(0, I_d), sample k drawn from stream (seed, k),
/// summed in sample order. Throws kInvalidParameter when num_samples < 100.
WidthEstimate estimate_width_mc(const DescentConeDescriptor& cone, std::size_t num_samples, std::uint64_t seed);

/// inf_{t >= 0} s (1 + t^2) + (d - s) E(|g| - t)_+^2 with
/// E(|g| - t)_+^2 = 2 (1 + t^2) Q(t) - 2 t phi(t); ternary search on t in [0, 10] to 1e-8.
double width_analytic_l1(std::size_t d, std::size_t s);

/// The ternary search objective, exposed for oracles: s (1 + t^2) + (d - s) E(|g| - t)_+^2.
double l1_width_objective(std::size_t d, std::size_t s, double t);

/// sqrt(2) Gamma((t+1)/2) / Gamma(t/2), the mean of a chi variable with t degrees of freedom.
double phi_gamma(double t);

enum class WidthMethod { kMonteCarlo, kAnalytic, kAuto };

/// n0 = M(R, w*) for the cone. kAuto prefers closed forms (full space: d, subspace: s, l1: the
/// analytic value) and falls back to Monte Carlo with 1e5 samples. The l2 cone reports d and the
/// sparsity cone reports the l1 value at the same (d, s), whatever the method.
double minimal_samples(const DescentConeDescriptor& cone, WidthMethod method, std::uint64_t seed = 0);

}  // namespace relupgd
