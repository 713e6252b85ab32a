#include "relupgd/planted_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "relupgd/error.hpp"
#include "relupgd/rng.hpp"

namespace relupgd {
namespace {

// Stream domains under a user seed.
constexpr std::uint64_t kPlantedSupportStream = 0x5355505054ULL;
constexpr std::uint64_t kPlantedValueStream = 0x56414c5545ULL;

}  // namespace

Dataset::Dataset(std::size_t n, std::size_t d, std::uint64_t seed, std::vector<double> features,
                 std::vector<double> labels, std::optional<WeightVector> w_star)
    : n_(n), d_(d), seed_(seed), features_(std::move(features)), labels_(std::move(labels)),
      w_star_(std::move(w_star)) {
  if (n_ == 0 || d_ == 0) throw Error(ErrorCode::kInvalidParameter, "dataset needs n, d >= 1");
  if (features_.size() != n_ * d_ || labels_.size() != n_) {
    throw Error(ErrorCode::kInvalidParameter, "feature/label storage does not match n x d");
  }
  for (double y : labels_) {
    if (!(y >= 0.0) || !std::isfinite(y)) {
      throw Error(ErrorCode::kInvalidParameter, "labels must be finite and nonnegative");
    }
  }
  if (w_star_ && w_star_->dim() != d_) {
    throw Error(ErrorCode::kDimensionMismatch, "w_star dimension differs from d");
  }
}

bool Dataset::realizable_by(const WeightVector& w) const {
  if (w.dim() != d_) return false;
  for (std::size_t i = 0; i < n_; ++i) {
    if (std::max(0.0, dot(row(i), w.view())) != labels_[i]) return false;
  }
  return true;
}

WeightVector make_planted(const PlantedSpec& spec) {
  if (spec.d == 0) throw Error(ErrorCode::kInvalidSpec, "d must be >= 1");
  if (!(spec.norm > 0.0) || !std::isfinite(spec.norm)) {
    throw Error(ErrorCode::kInvalidSpec, "norm must be positive and finite");
  }
  const std::size_t s = spec.structure == Structure::kDense ? spec.d : spec.sparsity;
  if (s == 0 || s > spec.d) throw Error(ErrorCode::kInvalidSpec, "sparsity must satisfy 1 <= s <= d");

  std::vector<std::size_t> index(spec.d);
  std::iota(index.begin(), index.end(), std::size_t{0});
  if (s < spec.d) {
    StreamRng rng(spec.seed, kPlantedSupportStream);
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(spec.d - i));
      std::swap(index[i], index[j]);
    }
    std::sort(index.begin(), index.begin() + static_cast<std::ptrdiff_t>(s));
  }

  std::vector<double> entries(spec.d, 0.0);
  StreamRng rng(spec.seed, kPlantedValueStream);
  double sq = 0.0;
  // A normal draw of exactly zero would shrink the support; redraw (probability ~0).
  for (std::size_t i = 0; i < s; ++i) {
    double v = 0.0;
    while (v == 0.0) v = rng.normal();
    entries[index[i]] = v;
    sq += v * v;
  }
  const double scale = spec.norm / std::sqrt(sq);
  for (double& v : entries) v *= scale;
  return WeightVector(std::move(entries));
}

std::vector<double> relu_labels(std::span<const double> features, std::size_t d,
                                const WeightVector& w) {
  if (w.dim() != d || features.size() % d != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "features and weight vector disagree on d");
  }
  const std::size_t n = features.size() / d;
  std::vector<double> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = std::max(0.0, dot(features.subspan(i * d, d), w.view()));
  }
  return labels;
}

Dataset generate(const WeightVector& w_star, std::size_t n, std::uint64_t seed) {
  const std::size_t d = w_star.dim();
  if (n == 0 || d == 0) throw Error(ErrorCode::kInvalidParameter, "generate needs n, d >= 1");
  if (!w_star.all_finite()) throw Error(ErrorCode::kInvalidParameter, "w_star has non-finite entries");
  std::vector<double> features(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    StreamRng rng(seed, i);
    for (std::size_t j = 0; j < d; ++j) features[i * d + j] = rng.normal();
  }
  auto labels = relu_labels(features, d, w_star);
  return Dataset(n, d, seed, std::move(features), std::move(labels), w_star);
}

Dataset realize(const std::vector<std::vector<double>>& rows, const WeightVector& w_star,
                std::uint64_t seed) {
  const std::size_t d = w_star.dim();
  std::vector<double> features;
  features.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw Error(ErrorCode::kDimensionMismatch, "row dimension differs from w_star");
    features.insert(features.end(), r.begin(), r.end());
  }
  auto labels = relu_labels(features, d, w_star);
  return Dataset(rows.size(), d, seed, std::move(features), std::move(labels), w_star);
}

std::string to_json(const Dataset& data) {
  nlohmann::json j;
  j["d"] = data.d();
  j["n"] = data.n();
  j["seed"] = data.seed();
  if (data.w_star()) j["w_star"] = data.w_star()->entries();
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto r = data.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["features"] = std::move(rows);
  j["labels"] = std::vector<double>(data.labels().begin(), data.labels().end());
  return j.dump();
}

Dataset dataset_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfigParse, std::string("dataset JSON: ") + e.what());
  }
  try {
    const auto d = j.at("d").get<std::size_t>();
    const auto n = j.at("n").get<std::size_t>();
    const auto seed = j.at("seed").get<std::uint64_t>();
    std::vector<double> features;
    features.reserve(n * d);
    const auto& rows = j.at("features");
    if (rows.size() != n) throw Error(ErrorCode::kConfigParse, "dataset JSON: features has wrong row count");
    for (const auto& r : rows) {
      auto v = r.get<std::vector<double>>();
      if (v.size() != d) throw Error(ErrorCode::kConfigParse, "dataset JSON: feature row has wrong length");
      features.insert(features.end(), v.begin(), v.end());
    }
    auto labels = j.at("labels").get<std::vector<double>>();
    std::optional<WeightVector> w_star;
    if (j.contains("w_star")) w_star = WeightVector(j["w_star"].get<std::vector<double>>());
    return Dataset(n, d, seed, std::move(features), std::move(labels), std::move(w_star));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigParse, std::string("dataset JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigParse) throw;
    throw Error(ErrorCode::kConfigParse, std::string("dataset JSON: ") + e.what());
  }
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path);
  out << to_json(data) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return dataset_from_json(buffer.str());
}

}  // namespace relupgd
