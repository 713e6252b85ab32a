#include "relupgd/constraint_projections.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "relupgd/error.hpp"

namespace relupgd {

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kUnconstrained: return "none";
    case ConstraintKind::kL2Ball: return "l2";
    case ConstraintKind::kL1Ball: return "l1";
    case ConstraintKind::kSparsity: return "sparsity";
  }
  return "unknown";
}

ConstraintKind parse_constraint_kind(const std::string& text) {
  if (text == "none") return ConstraintKind::kUnconstrained;
  if (text == "l2") return ConstraintKind::kL2Ball;
  if (text == "l1") return ConstraintKind::kL1Ball;
  if (text == "sparsity") return ConstraintKind::kSparsity;
  throw Error(ErrorCode::kConfigParse, "unknown constraint '" + text + "' (expected none|l1|l2|sparsity)");
}

ConstraintSet ConstraintSet::l2_ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidParameter, "l2 radius must be positive and finite");
  }
  return ConstraintSet(ConstraintKind::kL2Ball, radius, 0);
}

ConstraintSet ConstraintSet::l1_ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidParameter, "l1 radius must be positive and finite");
  }
  return ConstraintSet(ConstraintKind::kL1Ball, radius, 0);
}

ConstraintSet ConstraintSet::sparsity(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidParameter, "sparsity level k must be >= 1");
  return ConstraintSet(ConstraintKind::kSparsity, 0.0, k);
}

double ConstraintSet::regularizer(const WeightVector& w) const {
  switch (kind_) {
    case ConstraintKind::kUnconstrained: return 0.0;
    case ConstraintKind::kL2Ball: return norm2(w.view());
    case ConstraintKind::kL1Ball: return norm1(w.view());
    case ConstraintKind::kSparsity: return static_cast<double>(count_nonzero(w.view()));
  }
  return 0.0;
}

bool ConstraintSet::contains(const WeightVector& w, double tol) const {
  switch (kind_) {
    case ConstraintKind::kUnconstrained: return true;
    case ConstraintKind::kL2Ball:
    case ConstraintKind::kL1Ball: return regularizer(w) <= radius_ + tol;
    case ConstraintKind::kSparsity: return count_nonzero(w.view()) <= k_;
  }
  return false;
}

std::string ConstraintSet::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  if (kind_ == ConstraintKind::kL1Ball || kind_ == ConstraintKind::kL2Ball) os << "(R=" << radius_ << ")";
  if (kind_ == ConstraintKind::kSparsity) os << "(k=" << k_ << ")";
  return os.str();
}

namespace {

WeightVector project_l2(double radius, const WeightVector& v) {
  const double norm = norm2(v.view());
  if (norm <= radius) return v;
  WeightVector out = v;
  const double scale = radius / norm;
  for (double& x : out.view()) x *= scale;
  return out;
}

// Projection onto {||w||_1 <= R}: find theta with sum_i (|v_i| - theta)_+ = R by scanning the
// sorted magnitudes, then soft-threshold.
WeightVector project_l1(double radius, const WeightVector& v) {
  if (norm1(v.view()) <= radius) return v;
  std::vector<double> mags(v.dim());
  std::transform(v.entries().begin(), v.entries().end(), mags.begin(), [](double x) { return std::abs(x); });
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumsum += mags[j];
    const double candidate = (cumsum - radius) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
    else break;
  }
  WeightVector out = v;
  for (double& x : out.view()) {
    const double shrunk = std::abs(x) - theta;
    x = shrunk > 0.0 ? std::copysign(shrunk, x) : 0.0;
  }
  return out;
}

WeightVector project_sparsity(std::size_t k, const WeightVector& v) {
  const std::size_t d = v.dim();
  if (k > d) throw Error(ErrorCode::kInvalidParameter, "sparsity level k exceeds dimension");
  if (k == d) return v;
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto by_magnitude = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(v[a]);
    const double mb = std::abs(v[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), by_magnitude);
  WeightVector out = WeightVector::zeros(d);
  for (std::size_t i = 0; i < k; ++i) out[order[i]] = v[order[i]];
  return out;
}

}  // namespace

WeightVector project(const ConstraintSet& set, const WeightVector& v) {
  if (!v.all_finite()) throw Error(ErrorCode::kInvalidParameter, "cannot project a non-finite vector");
  switch (set.kind()) {
    case ConstraintKind::kUnconstrained: return v;
    case ConstraintKind::kL2Ball: return project_l2(set.radius(), v);
    case ConstraintKind::kL1Ball: return project_l1(set.radius(), v);
    case ConstraintKind::kSparsity: return project_sparsity(set.k(), v);
  }
  return v;
}

ConstraintSet natural_radius(ConstraintKind kind, const WeightVector& w_star) {
  if (!w_star.all_finite()) throw Error(ErrorCode::kInvalidParameter, "w_star has non-finite entries");
  if (kind != ConstraintKind::kUnconstrained && count_nonzero(w_star.view()) == 0) {
    throw Error(ErrorCode::kZeroVector, "natural radius is undefined at w_star = 0");
  }
  switch (kind) {
    case ConstraintKind::kUnconstrained: return ConstraintSet::unconstrained();
    case ConstraintKind::kL2Ball: return ConstraintSet::l2_ball(norm2(w_star.view()));
    case ConstraintKind::kL1Ball: return ConstraintSet::l1_ball(norm1(w_star.view()));
    case ConstraintKind::kSparsity: return ConstraintSet::sparsity(count_nonzero(w_star.view()));
  }
  return ConstraintSet::unconstrained();
}

ConstraintSet ConstraintSpec::resolve(const std::optional<WeightVector>& w_star) const {
  const bool needs_truth = (kind == ConstraintKind::kL1Ball || kind == ConstraintKind::kL2Ball) ? !radius
                           : kind == ConstraintKind::kSparsity                                     ? k == 0
                                                                                                   : false;
  if (needs_truth && !w_star) {
    throw Error(ErrorCode::kConfigParse, "radius/k 'auto' requires a dataset carrying w_star");
  }
  switch (kind) {
    case ConstraintKind::kUnconstrained: return ConstraintSet::unconstrained();
    case ConstraintKind::kL2Ball: return radius ? ConstraintSet::l2_ball(*radius) : natural_radius(kind, *w_star);
    case ConstraintKind::kL1Ball: return radius ? ConstraintSet::l1_ball(*radius) : natural_radius(kind, *w_star);
    case ConstraintKind::kSparsity: return k != 0 ? ConstraintSet::sparsity(k) : natural_radius(kind, *w_star);
  }
  return ConstraintSet::unconstrained();
}

}  // namespace relupgd
