#include "relupgd/empirical_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "relupgd/error.hpp"
#include "relupgd/loss_gradient.hpp"
#include "relupgd/pgd_solver.hpp"

namespace relupgd {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void normalize(WeightVector& h) {
  const double norm = norm2(h.view());
  if (norm > 0.0) {
    for (double& v : h.view()) v /= norm;
  }
}

WeightVector sample_l1_direction(const DescentConeDescriptor& cone, StreamRng& rng) {
  const std::size_t d = cone.d();
  const std::size_t s = cone.s();
  WeightVector h = WeightVector::zeros(d);
  std::vector<bool> on_support(d, false);
  for (std::size_t i : cone.support) {
    on_support[i] = true;
    h[i] = rng.normal();
  }
  std::vector<std::size_t> off;
  for (std::size_t i = 0; i < d; ++i) {
    if (!on_support[i]) off.push_back(i);
  }
  const std::size_t spread = std::min(s, off.size());
  const auto count = static_cast<std::size_t>(rng.below(spread + 1));
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(off.size() - k));
    std::swap(off[k], off[j]);
    h[off[k]] = rng.normal();
  }
  double excess = 0.0;  // sum_T sgn_i h_i + ||h_{T^c}||_1, must end up <= 0
  for (std::size_t k = 0; k < s; ++k) excess += cone.signs[k] * h[cone.support[k]];
  for (std::size_t k = 0; k < count; ++k) excess += std::abs(h[off[k]]);
  if (excess > 0.0) {
    const double shift = excess * (1.0 + rng.uniform()) / static_cast<double>(s);
    for (std::size_t k = 0; k < s; ++k) h[cone.support[k]] -= shift * cone.signs[k];
  }
  normalize(h);
  return h;
}

double check_omega_sq(const DescentConeDescriptor& cone) {
  return minimal_samples(cone, WidthMethod::kAuto);
}

void finish(CheckReport& report, double fraction_allowed) {
  report.allowed_fraction = fraction_allowed;
  report.max_observed = -std::numeric_limits<double>::infinity();
  report.violations = 0;
  report.skipped = 0;
  for (double stat : report.trial_stats) {
    if (std::isnan(stat)) {
      ++report.skipped;
      continue;
    }
    report.max_observed = std::max(report.max_observed, stat);
    if (stat > report.threshold) ++report.violations;
  }
  if (report.skipped == report.trial_stats.size()) report.max_observed = 0.0;
  report.pass = report.violation_fraction() <= fraction_allowed;
}

// Per-trial max deviation over the sampled directions; `weights` empty for the unweighted check.
CheckReport isometry_report(const DescentConeDescriptor& cone, const ConcentrationParams& params, std::size_t n,
                            std::span<const double> weights) {
  CheckReport report;
  report.threshold = params.delta;
  report.trials = params.trials;
  report.trial_stats.reserve(params.trials);
  for (std::size_t t = 0; t < params.trials; ++t) {
    const TrialSample sample = draw_concentration_trial(cone, n, params.num_directions, params.seed, t, false);
    const auto gram = weighted_gram(sample.features, sample.d, weights);
    double worst = 0.0;
    for (const auto& h : sample.directions) worst = std::max(worst, isometry_deviation(gram, h));
    report.trial_stats.push_back(worst);
  }
  return report;
}

void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorCode::kSamplingConditionUnmet, what);
}

}  // namespace

double CheckReport::violation_fraction() const {
  const std::size_t counted = trials - skipped;
  return counted == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(counted);
}

std::string to_json(const CheckReport& report) {
  nlohmann::json j;
  j["check_name"] = report.check_name;
  j["label"] = report.label;
  j["trials"] = report.trials;
  j["violations"] = report.violations;
  j["skipped"] = report.skipped;
  j["violation_fraction"] = report.violation_fraction();
  j["max_observed"] = report.max_observed;
  j["threshold"] = report.threshold;
  j["allowed_fraction"] = report.allowed_fraction;
  j["gated"] = report.gated;
  j["pass"] = report.pass;
  j["parameters"] = report.parameters;
  auto stats = nlohmann::json::array();
  for (double v : report.trial_stats) stats.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
  j["trial_stats"] = std::move(stats);
  return j.dump(2);
}

WeightVector sample_cone_direction(const DescentConeDescriptor& cone, StreamRng& rng) {
  const std::size_t d = cone.d();
  WeightVector h = WeightVector::zeros(d);
  switch (cone.kind) {
    case ConeKind::kFullSpace:
      for (double& v : h.view()) v = rng.normal();
      break;
    case ConeKind::kSubspace:
      for (std::size_t i : cone.support) h[i] = rng.normal();
      break;
    case ConeKind::kL1: return sample_l1_direction(cone, rng);
    case ConeKind::kL2: {
      for (double& v : h.view()) v = rng.normal();
      const double along = dot(h.view(), cone.anchor.view());
      if (along > 0.0) {
        const double scale = 2.0 * along / dot(cone.anchor.view(), cone.anchor.view());
        for (std::size_t i = 0; i < d; ++i) h[i] -= scale * cone.anchor[i];
      }
      break;
    }
    case ConeKind::kSparsity:
      throw Error(ErrorCode::kUnsupportedCone, "no direction sampler for the sparsity cone");
  }
  normalize(h);
  return h;
}

TrialSample draw_concentration_trial(const DescentConeDescriptor& cone, std::size_t n, std::size_t num_directions,
                                     std::uint64_t seed, std::size_t trial, bool paired) {
  TrialSample sample;
  sample.n = n;
  sample.d = cone.d();
  sample.features.resize(n * sample.d);
  const std::uint64_t feature_seed = derive_seed(seed, 2 * trial);
  for (std::size_t i = 0; i < n; ++i) {
    StreamRng rng(feature_seed, i);
    for (std::size_t j = 0; j < sample.d; ++j) sample.features[i * sample.d + j] = rng.normal();
  }
  StreamRng rng(derive_seed(seed, 2 * trial + 1), 0);
  sample.directions.reserve(num_directions);
  for (std::size_t k = 0; k < num_directions; ++k) {
    sample.directions.push_back(sample_cone_direction(cone, rng));
    if (paired) sample.partners.push_back(sample_cone_direction(cone, rng));
  }
  return sample;
}

std::vector<double> weighted_gram(std::span<const double> features, std::size_t d, std::span<const double> weights) {
  const std::size_t n = features.size() / d;
  if (!weights.empty() && weights.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "one weight per feature row required");
  }
  std::vector<double> gram(d * d, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    total += w;
    const double* x = features.data() + i * d;
    for (std::size_t a = 0; a < d; ++a) {
      const double wa = w * x[a];
      for (std::size_t b = a; b < d; ++b) gram[a * d + b] += wa * x[b];
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      gram[a * d + b] /= total;
      gram[b * d + a] = gram[a * d + b];
    }
  }
  return gram;
}

namespace {

double bilinear(std::span<const double> gram, const WeightVector& u, const WeightVector& h) {
  const std::size_t d = u.dim();
  double acc = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    if (u[a] == 0.0) continue;
    acc += u[a] * dot(gram.subspan(a * d, d), h.view());
  }
  return acc;
}

}  // namespace

double isometry_deviation(std::span<const double> gram, const WeightVector& h) {
  const double sq = dot(h.view(), h.view());
  if (sq == 0.0) return 0.0;
  return std::abs(bilinear(gram, h, h) - sq) / sq;
}

double cross_deviation(std::span<const double> gram, const WeightVector& u, const WeightVector& h) {
  const double scale = norm2(u.view()) * norm2(h.view());
  if (scale == 0.0) return 0.0;
  return std::abs(bilinear(gram, u, h) - dot(u.view(), h.view())) / scale;
}

CheckReport check_restricted_isometry(const DescentConeDescriptor& cone, const ConcentrationParams& params) {
  const double omega_sq = check_omega_sq(cone);
  const double n = static_cast<double>(params.n);
  const double delta = params.delta;
  require(delta > 0.0 && n >= std::max(20.0 * omega_sq / (delta * delta), 1.0 / (2.0 * delta) - 1.0),
          "restricted isometry needs n >= max(20 w^2/delta^2, 1/(2 delta) - 1)");
  CheckReport report = isometry_report(cone, params, params.n, {});
  report.check_name = "restricted_isometry";
  report.parameters = {{"n", n}, {"delta", delta}, {"omega_sq", omega_sq}, {"d", static_cast<double>(cone.d())},
                       {"directions", static_cast<double>(params.num_directions)}};
  finish(report, 2.0 * std::exp(-delta * delta * n / 360.0) + kMonteCarloSlack);
  return report;
}

CheckReport check_cross_term(const DescentConeDescriptor& cone, const ConcentrationParams& params) {
  const double omega_sq = check_omega_sq(cone);
  const double n = static_cast<double>(params.n);
  const double delta = params.delta;
  require(delta > 0.0 && n >= std::max(80.0 * omega_sq / (delta * delta), 2.0 / delta - 1.0),
          "cross-term check needs n >= max(80 w^2/delta^2, 2/delta - 1)");
  CheckReport report;
  report.check_name = "cross_term";
  report.threshold = delta;
  report.trials = params.trials;
  for (std::size_t t = 0; t < params.trials; ++t) {
    const TrialSample sample = draw_concentration_trial(cone, params.n, params.num_directions, params.seed, t, true);
    const auto gram = weighted_gram(sample.features, sample.d, {});
    double worst = 0.0;
    for (std::size_t k = 0; k < sample.directions.size(); ++k) {
      worst = std::max(worst, cross_deviation(gram, sample.directions[k], sample.partners[k]));
    }
    report.trial_stats.push_back(worst);
  }
  report.parameters = {{"n", n}, {"delta", delta}, {"omega_sq", omega_sq}, {"d", static_cast<double>(cone.d())},
                       {"directions", static_cast<double>(params.num_directions)}};
  finish(report, 6.0 * std::exp(-delta * delta * n / 1440.0) + kMonteCarloSlack);
  return report;
}

CheckReport check_weighted_isometry(std::span<const double> weights, const DescentConeDescriptor& cone,
                                    const ConcentrationParams& params) {
  if (weights.empty()) throw Error(ErrorCode::kInvalidParameter, "weight vector s is empty");
  if (std::any_of(weights.begin(), weights.end(), [](double v) { return v == 0.0 || !std::isfinite(v); })) {
    throw Error(ErrorCode::kZeroEntryInWeights, "every entry of s must be nonzero and finite");
  }
  std::vector<double> squared(weights.size());
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    squared[i] = weights[i] * weights[i];
    norm_sq += squared[i];
  }
  const double inf_sq = norm_inf(weights) * norm_inf(weights);
  const double omega_sq = check_omega_sq(cone);
  const double delta = params.delta;
  require(delta > 0.0 && norm_sq >= std::max(20.0 * inf_sq * omega_sq / (delta * delta), 3.0 / (2.0 * delta) - 1.0),
          "weighted isometry needs ||s||^2 >= max(20 ||s||_inf^2 w^2/delta^2, 3/(2 delta) - 1)");
  CheckReport report = isometry_report(cone, params, weights.size(), squared);
  report.check_name = "weighted_isometry";
  report.parameters = {{"n", static_cast<double>(weights.size())}, {"delta", delta}, {"omega_sq", omega_sq},
                       {"s_norm_sq", norm_sq}, {"s_inf", norm_inf(weights)}, {"d", static_cast<double>(cone.d())},
                       {"directions", static_cast<double>(params.num_directions)}};
  finish(report, 6.0 * std::exp(-delta * delta * norm_sq / 1440.0) + kMonteCarloSlack);
  return report;
}

WeightVector first_iterate(const Dataset& data, const ConstraintSet& set) {
  SolveConfig cfg;
  cfg.max_iters = 1;
  cfg.target_rel_err = 0.0;
  return solve(data, set, cfg).w;
}

PlantedTrial draw_planted_trial(const PlantedCheckParams& params, std::size_t trial) {
  auto w_star = make_planted(PlantedSpec::sparse(params.d, params.s, 1.0, derive_seed(params.seed, 3 * trial)));
  auto data = generate(w_star, params.n, derive_seed(params.seed, 3 * trial + 1));
  return {std::move(w_star), std::move(data)};
}

namespace {

double planted_n0(const PlantedCheckParams& params) {
  return minimal_samples(DescentConeDescriptor::canonical(ConeKind::kL1, params.d, params.s), WidthMethod::kAnalytic);
}

}  // namespace

CheckReport check_first_iteration(const PlantedCheckParams& params) {
  if (params.n == 0 || params.trials == 0) throw Error(ErrorCode::kInvalidParameter, "need n, trials >= 1");
  const double n0 = params.constraint == ConstraintKind::kUnconstrained ? static_cast<double>(params.d)
                                                                         : planted_n0(params);
  CheckReport report;
  report.check_name = "first_iteration";
  report.threshold = kFirstIterateRadius;
  report.trials = params.trials;
  report.gated = params.constraint != ConstraintKind::kUnconstrained &&
                 static_cast<double>(params.n) >= kDefaultOversampling * n0;
  for (std::size_t t = 0; t < params.trials; ++t) {
    const PlantedTrial trial = draw_planted_trial(params, t);
    const ConstraintSet set = natural_radius(params.constraint, trial.w_star);
    const WeightVector w1 = first_iterate(trial.data, set);
    report.trial_stats.push_back(distance(w1.view(), trial.w_star.view()) / norm2(trial.w_star.view()));
  }
  report.parameters = {{"d", static_cast<double>(params.d)}, {"s", static_cast<double>(params.s)},
                       {"n", static_cast<double>(params.n)}, {"n0", n0},
                       {"n_over_n0", static_cast<double>(params.n) / n0}};
  report.label = "first-iterate bound (sampled trials)";
  finish(report, kUnspecifiedConstantFraction);
  return report;
}

std::optional<double> key_inequality_statistic(const Dataset& data, const WeightVector& w_star,
                                               const WeightVector& w, std::span<const WeightVector> directions) {
  if (w == w_star) return std::nullopt;
  const GradientVector grad = calibrated_gradient(w, data);
  WeightVector residual = w;
  for (std::size_t j = 0; j < residual.dim(); ++j) residual[j] = (w[j] - w_star[j]) - grad.entries[j];
  const double h_norm = distance(w.view(), w_star.view());
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& u : directions) best = std::max(best, dot(u.view(), residual.view()));
  return best / h_norm;
}

CheckReport check_key_inequality(const PlantedCheckParams& params) {
  if (params.n == 0 || params.trials == 0) throw Error(ErrorCode::kInvalidParameter, "need n, trials >= 1");
  const double n0 = planted_n0(params);
  CheckReport report;
  report.check_name = "key_inequality";
  report.threshold = kKeyInequalityBound;
  report.trials = params.trials;
  report.gated = static_cast<double>(params.n) >= kDefaultOversampling * n0;
  for (std::size_t t = 0; t < params.trials; ++t) {
    const PlantedTrial trial = draw_planted_trial(params, t);
    const ConstraintSet set = natural_radius(ConstraintKind::kL1Ball, trial.w_star);
    const auto cone = DescentConeDescriptor::at(ConeKind::kL1, trial.w_star);
    StreamRng rng(derive_seed(params.seed, 3 * t + 2), 0);

    const WeightVector offset = sample_cone_direction(cone, rng);
    const double radius = kFirstIterateRadius * norm2(trial.w_star.view());
    WeightVector w = trial.w_star;
    for (std::size_t j = 0; j < w.dim(); ++j) w[j] += radius * offset[j];
    w = project(set, w);

    std::vector<WeightVector> directions;
    directions.reserve(params.num_directions);
    for (std::size_t k = 0; k < params.num_directions; ++k) directions.push_back(sample_cone_direction(cone, rng));
    const auto stat = key_inequality_statistic(trial.data, trial.w_star, w, directions);
    report.trial_stats.push_back(stat ? *stat : kNaN);
  }
  report.parameters = {{"d", static_cast<double>(params.d)}, {"s", static_cast<double>(params.s)},
                       {"n", static_cast<double>(params.n)}, {"n0", n0},
                       {"n_over_n0", static_cast<double>(params.n) / n0},
                       {"directions", static_cast<double>(params.num_directions)}};
  finish(report, kUnspecifiedConstantFraction);
  return report;
}

}  // namespace relupgd
