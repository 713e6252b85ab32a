#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relupgd/vector.hpp"

namespace relupgd {

/// n samples of the realizable single-ReLU model. Features are stored row-major, one x_i per row;
/// labels are y_i = max(0, <x_i, w*>) and therefore nonnegative. Immutable after construction.
class Dataset {
 public:
  /// Throws kInvalidParameter on shape mismatch or a negative/non-finite label.
  Dataset(std::size_t n, std::size_t d, std::uint64_t seed, std::vector<double> features,
          std::vector<double> labels, std::optional<WeightVector> w_star = std::nullopt);

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::span<const double> row(std::size_t i) const { return {features_.data() + i * d_, d_}; }
  std::span<const double> features() const noexcept { return features_; }
  std::span<const double> labels() const noexcept { return labels_; }
  const std::optional<WeightVector>& w_star() const noexcept { return w_star_; }

  /// True when max(0, <x_i, w>) reproduces every stored label bit-exactly.
  bool realizable_by(const WeightVector& w) const;

 private:
  std::size_t n_;
  std::size_t d_;
  std::uint64_t seed_;
  std::vector<double> features_;
  std::vector<double> labels_;
  std::optional<WeightVector> w_star_;
};

enum class Structure { kDense, kSparse };

struct PlantedSpec {
  std::size_t d = 1;
  Structure structure = Structure::kDense;
  std::size_t sparsity = 0;  // used when structure == kSparse
  double norm = 1.0;         // target ||w*||_2
  std::uint64_t seed = 0;

  static PlantedSpec dense(std::size_t d, double norm, std::uint64_t seed) {
    return {d, Structure::kDense, d, norm, seed};
  }
  static PlantedSpec sparse(std::size_t d, std::size_t s, double norm, std::uint64_t seed) {
    return {d, Structure::kSparse, s, norm, seed};
  }
};

/// Planted weight vector. For sparse structure the support is a uniformly random s-subset
/// (partial Fisher-Yates); nonzero values are standard normal, then rescaled to `norm`.
/// Throws kInvalidSpec when d == 0, s == 0, s > d or norm <= 0.
WeightVector make_planted(const PlantedSpec& spec);

/// Draws n rows x_i ~ N(0, I_d), each row from its own stream (seed, i), and labels them with
/// max(0, <x_i, w_star>).
Dataset generate(const WeightVector& w_star, std::size_t n, std::uint64_t seed);

/// Labels fixed feature rows with a planted vector (rows must all have dimension w_star.dim()).
Dataset realize(const std::vector<std::vector<double>>& rows, const WeightVector& w_star,
                std::uint64_t seed = 0);

/// y_i = max(0, <x_i, w>) for a row-major n x d feature block.
std::vector<double> relu_labels(std::span<const double> features, std::size_t d,
                                const WeightVector& w);

/// Dataset <-> JSON. Doubles are written in shortest round-trip form.
std::string to_json(const Dataset& data);
Dataset dataset_from_json(const std::string& text);
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace relupgd
