#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "relupgd/vector.hpp"

namespace relupgd {

enum class ConstraintKind { kUnconstrained, kL2Ball, kL1Ball, kSparsity };

const char* to_string(ConstraintKind kind);
/// Accepts the CLI/config spellings "none", "l2", "l1", "sparsity".
ConstraintKind parse_constraint_kind(const std::string& text);

/// K = {w : R(w) <= level} for one of the supported regularizers R.
class ConstraintSet {
 public:
  static ConstraintSet unconstrained() { return ConstraintSet(ConstraintKind::kUnconstrained, 0.0, 0); }
  static ConstraintSet l2_ball(double radius);
  static ConstraintSet l1_ball(double radius);
  static ConstraintSet sparsity(std::size_t k);

  ConstraintKind kind() const noexcept { return kind_; }
  double radius() const noexcept { return radius_; }
  std::size_t k() const noexcept { return k_; }
  bool is_convex() const noexcept { return kind_ != ConstraintKind::kSparsity; }

  /// R(w): ||w||_2, ||w||_1 or ||w||_0 (0 for unconstrained).
  double regularizer(const WeightVector& w) const;
  /// Membership with additive slack `tol` on the radius (exact for sparsity).
  bool contains(const WeightVector& w, double tol = 0.0) const;

  std::string describe() const;

 private:
  ConstraintSet(ConstraintKind kind, double radius, std::size_t k) : kind_(kind), radius_(radius), k_(k) {}

  ConstraintKind kind_;
  double radius_;
  std::size_t k_;
};

/// Euclidean projection onto K.
///  - l2 ball: radial shrink;
///  - l1 ball: soft threshold at the exact simplex-projection level (sort based, O(d log d));
///  - sparsity: keep the k largest magnitudes, ties broken towards the lower index.
/// Throws kInvalidParameter for non-finite input or k > d.
WeightVector project(const ConstraintSet& set, const WeightVector& v);

/// Instantiates K at the level R(w*): radius ||w*||_1 or ||w*||_2, or k = ||w*||_0.
/// Throws kZeroVector when w* = 0 for the ball and sparsity kinds.
ConstraintSet natural_radius(ConstraintKind kind, const WeightVector& w_star);

/// "auto" or a positive real for the radius; k used only for sparsity (0 = auto).
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::kUnconstrained;
  std::optional<double> radius;  // nullopt = auto
  std::size_t k = 0;             // 0 = auto

  /// Throws kZeroVector/kInvalidParameter as the underlying factories do.
  ConstraintSet resolve(const std::optional<WeightVector>& w_star) const;
};

}  // namespace relupgd
