#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace relupgd {

/// Dense weight vector in R^d: the planted truth w*, the iterates w_tau, and differences h.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> entries) : entries_(std::move(entries)) {}

  static WeightVector zeros(std::size_t d) { return WeightVector(std::vector<double>(d, 0.0)); }

  std::size_t dim() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  double& operator[](std::size_t i) { return entries_[i]; }

  std::span<const double> view() const noexcept { return entries_; }
  std::span<double> view() noexcept { return entries_; }
  const std::vector<double>& entries() const noexcept { return entries_; }

  bool all_finite() const noexcept;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> entries_;
};

// Reductions below run sequentially in index order; results are bit-reproducible.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);
double norm_inf(std::span<const double> a);
std::size_t count_nonzero(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);

inline double sgn(double z) noexcept { return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0); }

}  // namespace relupgd
