#include "relupgd/loss_gradient.hpp"

#include <algorithm>
#include <cmath>

#include "relupgd/error.hpp"

namespace relupgd {
namespace {

void require_dims(const WeightVector& w, const Dataset& data) {
  if (w.dim() != data.d()) {
    throw Error(ErrorCode::kDimensionMismatch, "weight vector has dimension " +
                                                   std::to_string(w.dim()) + ", dataset has d = " +
                                                   std::to_string(data.d()));
  }
}

// sum_i residual_i * activation(z_i) * x_i, then multiplied by `scale`.
template <typename Activation>
GradientVector accumulate_gradient(const WeightVector& w, const Dataset& data, double scale,
                                   Activation activation) {
  require_dims(w, data);
  const std::size_t d = data.d();
  std::vector<double> g(d, 0.0);
  const auto labels = data.labels();
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto x = data.row(i);
    const double z = dot(x, w.view());
    const double coeff = (std::max(0.0, z) - labels[i]) * activation(z);
    if (coeff == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) g[j] += coeff * x[j];
  }
  for (double& v : g) v *= scale;
  return {WeightVector(std::move(g))};
}

}  // namespace

LossValue loss(const WeightVector& w, const Dataset& data) {
  require_dims(w, data);
  const auto labels = data.labels();
  double acc = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double r = std::max(0.0, dot(data.row(i), w.view())) - labels[i];
    acc += r * r;
  }
  return {acc / static_cast<double>(data.n())};
}

GradientVector generalized_gradient(const WeightVector& w, const Dataset& data) {
  return accumulate_gradient(w, data, 2.0 / static_cast<double>(data.n()),
                             [](double z) { return 1.0 + sgn(z); });
}

GradientVector calibrated_gradient(const WeightVector& w, const Dataset& data) {
  return accumulate_gradient(w, data, 1.0 / static_cast<double>(data.n()),
                             [](double z) { return z >= 0.0 ? 2.0 : 0.0; });
}

LossValue loss_decomposed(const WeightVector& w, const Dataset& data, const WeightVector& w_star) {
  require_dims(w, data);
  if (!data.realizable_by(w_star)) {
    throw Error(ErrorCode::kNotRealizable, "labels do not regenerate from the supplied w_star");
  }
  double abs_sq = 0.0;
  double diff_sq = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto x = data.row(i);
    const double zw = dot(x, w.view());
    const double zs = dot(x, w_star.view());
    const double a = std::abs(zw) - std::abs(zs);
    const double b = zw - zs;
    abs_sq += a * a;
    diff_sq += b * b;
    cross += a * b;
  }
  const double n = static_cast<double>(data.n());
  return {abs_sq / (4.0 * n) + diff_sq / (4.0 * n) + cross / (2.0 * n)};
}

}  // namespace relupgd
