#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relupgd/cone_geometry.hpp"
#include "relupgd/constraint_projections.hpp"
#include "relupgd/planted_model.hpp"
#include "relupgd/rng.hpp"

namespace relupgd {

/// Radius of the neighbourhood E(eps) around w* in which the first iterate lands and in which the
/// key inequality is checked.
inline constexpr double kFirstIterateRadius = 7.0 / 200.0;
/// Bound on sup_u <u, w - w* - grad L(w)> / ||w - w*||.
inline constexpr double kKeyInequalityBound = 0.25;
/// Failure fraction tolerated where the probability constants are unspecified.
inline constexpr double kUnspecifiedConstantFraction = 0.05;
/// Slack added to every tail-bound failure fraction.
inline constexpr double kMonteCarloSlack = 0.01;
/// Oversampling n >= 8 n0 under which the first-iterate and key-inequality checks are gated.
inline constexpr double kDefaultOversampling = 8.0;

/// Outcome of one sampled-direction check. Suprema over cones are replaced by maxima over random
/// cone directions, so a pass is a necessary condition for the uniform statement, not a proof.
struct CheckReport {
  std::string check_name;
  std::string label = "sampled-direction necessary check";
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::size_t skipped = 0;
  double max_observed = 0.0;
  double threshold = 0.0;
  double allowed_fraction = 0.0;
  bool gated = true;
  bool pass = false;
  /// Per-trial statistic (NaN for skipped trials); max_observed is their maximum.
  std::vector<double> trial_stats;
  std::map<std::string, double> parameters;

  double violation_fraction() const;
};

std::string to_json(const CheckReport& report);

/// Random unit vector in the cone: Gaussian on the support for kSubspace, Gaussian for kFullSpace,
/// a sign-consistent sparse perturbation for kL1 (Gaussian on T, a random handful of off-support
/// coordinates, then shifted along -sgn(w*_T) until sum_T sgn_i h_i + ||h_{T^c}||_1 <= 0), and a
/// Gaussian reflected into {<h, w*> <= 0} for kL2. Throws kUnsupportedCone for kSparsity.
WeightVector sample_cone_direction(const DescentConeDescriptor& cone, StreamRng& rng);

/// Everything one concentration trial consumes, regenerable from (seed, trial).
struct TrialSample {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> features;          // row-major n x d, rows ~ N(0, I_d)
  std::vector<WeightVector> directions;  // unit cone directions
  std::vector<WeightVector> partners;    // second member of each pair (cross-term check only)
};

TrialSample draw_concentration_trial(const DescentConeDescriptor& cone, std::size_t n, std::size_t num_directions,
                                     std::uint64_t seed, std::size_t trial, bool paired);

/// (sum_i w_i x_i x_i^T) / (sum_i w_i), packed row-major d x d. Empty weights mean w_i = 1.
std::vector<double> weighted_gram(std::span<const double> features, std::size_t d, std::span<const double> weights);

/// |h^T G h - ||h||^2| / ||h||^2, and 0 for h = 0.
double isometry_deviation(std::span<const double> gram, const WeightVector& h);
/// |u^T G h - <u, h>| / (||u|| ||h||), and 0 when either vector vanishes.
double cross_deviation(std::span<const double> gram, const WeightVector& u, const WeightVector& h);

struct ConcentrationParams {
  std::size_t n = 0;
  double delta = 0.5;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::size_t num_directions = 200;
};

/// max_h |(1/n) sum <x_i,h>^2 - ||h||^2| / ||h||^2 per trial; violation when above delta. Requires
/// n >= max(20 w^2 / delta^2, 1/(2 delta) - 1); allowed fraction 2 exp(-delta^2 n / 360) + 0.01.
CheckReport check_restricted_isometry(const DescentConeDescriptor& cone, const ConcentrationParams& params);

/// Pairs (u, h); requires n >= max(80 w^2 / delta^2, 2/delta - 1); allowed 6 exp(-delta^2 n / 1440) + 0.01.
CheckReport check_cross_term(const DescentConeDescriptor& cone, const ConcentrationParams& params);

/// Weighted form with n = weights.size(): |sum s_i^2 <x_i,u>^2 / ||s||^2 - ||u||^2| over unit u.
/// Requires every s_i != 0 (kZeroEntryInWeights) and ||s||^2 >= max(20 ||s||_inf^2 w^2 / delta^2,
/// 3/(2 delta) - 1); allowed 6 exp(-delta^2 ||s||^2 / 1440) + 0.01. With s = 1 it consumes the same
/// random streams as check_restricted_isometry and reproduces its statistics bit for bit.
CheckReport check_weighted_isometry(std::span<const double> weights, const DescentConeDescriptor& cone,
                                    const ConcentrationParams& params);

/// w_1 = P_K(w_0 - grad L(w_0)) from w_0 = 0, i.e. P_K((2/n) sum y_i x_i).
WeightVector first_iterate(const Dataset& data, const ConstraintSet& set);

struct PlantedCheckParams {
  std::size_t d = 200;
  std::size_t s = 10;
  std::size_t n = 0;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  ConstraintKind constraint = ConstraintKind::kL1Ball;
  std::size_t num_directions = 200;  // key inequality only
};

/// Per trial: planted unit-norm s-sparse w*, fresh data, ||w_1 - w*|| / ||w*||; violation above 7/200.
/// Gated (fraction <= 0.05) only for constrained runs with n >= 8 n0; otherwise recorded.
CheckReport check_first_iteration(const PlantedCheckParams& params);

/// max over the sampled directions u of <u, w - w* - grad L(w)> / ||w - w*||, or nullopt when w == w*.
std::optional<double> key_inequality_statistic(const Dataset& data, const WeightVector& w_star,
                                               const WeightVector& w, std::span<const WeightVector> directions);

/// Per trial: w drawn from E(7/200) as P_K(w* + eps ||w*|| u) with u a random cone direction, then
/// key_inequality_statistic over num_directions cone directions; violation above 1/4. Gated
/// (fraction <= 0.05) when n >= 8 n0; trials with w == w* are skipped.
CheckReport check_key_inequality(const PlantedCheckParams& params);

/// Trial seeds shared by the planted checks: w* from derive_seed(seed, 3t), data from 3t+1,
/// perturbation and directions from 3t+2.
struct PlantedTrial {
  WeightVector w_star;
  Dataset data;
};
PlantedTrial draw_planted_trial(const PlantedCheckParams& params, std::size_t trial);

}  // namespace relupgd
