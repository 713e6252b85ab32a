#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relupgd/constraint_projections.hpp"
#include "relupgd/planted_model.hpp"
#include "relupgd/pgd_solver.hpp"

namespace relupgd {

/// A literal sample size, or a multiple of ceil(n0) written "x<factor>" in config files.
struct NGridEntry {
  std::variant<std::size_t, double> value;

  static NGridEntry literal(std::size_t n) { return {n}; }
  static NGridEntry multiple(double factor) { return {factor}; }
};

struct SweepConfig {
  std::size_t d = 200;
  Structure structure = Structure::kSparse;
  std::size_t s = 10;
  double norm = 1.0;
  ConstraintSpec constraint{ConstraintKind::kL1Ball, std::nullopt, 0};
  std::vector<NGridEntry> n_grid;
  std::vector<std::uint64_t> seeds;
  std::size_t max_iters = 100;
  double success_rel_err = 1e-3;
  double step_size = 1.0;
  GradientRule gradient = GradientRule::kCalibrated;
  std::size_t workers = 1;

  std::size_t sparsity() const noexcept { return structure == Structure::kDense ? d : s; }
};

/// Parses the JSON sweep config. Unknown fields, wrong types and invariant violations (empty
/// n_grid, no seeds, s > d) raise kConfigParse naming the offending field.
SweepConfig parse_sweep_config(const std::string& json_text);
SweepConfig load_sweep_config(const std::string& path);

/// n0 for the config's (d, structure, constraint), from the closed forms in cone_geometry.
double sweep_n0(const SweepConfig& cfg);

/// Grid resolved against n0: "x<f>" becomes ceil(f * ceil(n0)). Throws kConfigParse unless the
/// result is strictly increasing.
std::vector<std::size_t> resolve_n_grid(const SweepConfig& cfg, double n0);

/// The planted vector and dataset used for one (n, seed) run; w* depends on the seed only and the
/// rows of a smaller n are a prefix of those of a larger one.
struct SweepInstance {
  WeightVector w_star;
  Dataset data;
};
SweepInstance make_instance(const SweepConfig& cfg, std::size_t n, std::uint64_t seed);

struct SweepRow {
  std::uint64_t seed = 0;
  std::size_t d = 0;
  std::size_t s = 0;
  std::size_t n = 0;
  double n0 = 0.0;
  std::string constraint;
  std::size_t iters_run = 0;
  double final_rel_err = 0.0;  // +inf when the run diverged
  bool success = false;
  std::optional<double> contraction_max;
};

struct SweepResult {
  double n0 = 0.0;
  std::vector<std::size_t> n_values;
  std::vector<SweepRow> rows;  // (n, seed) order
};

struct SuccessPoint {
  std::size_t n = 0;
  double fraction = 0.0;
};

/// One solve per (n, seed), fanned out over cfg.workers threads; rows are emitted in (n, seed)
/// order regardless of completion order.
SweepResult run_sweep(const SweepConfig& cfg);
std::vector<SuccessPoint> success_curve(const SweepResult& result);

std::string sweep_to_csv(const SweepResult& result);
std::string sweep_to_json(const SweepResult& result);

struct RateRow {
  std::size_t tau = 0;
  double mean_rel_err = 0.0;
  double p95_rel_err = 0.0;
};

struct RateTable {
  std::size_t n = 0;
  double n0 = 0.0;
  std::size_t runs = 0;
  std::vector<RateRow> rows;
  /// Runs whose measure_contraction is <= 1/2 (a run that reaches the target in one step counts).
  double fraction_contracting = 0.0;
  /// Runs with ||w_tau - w*|| <= 2^-tau ||w*|| at every recorded tau.
  double fraction_within_rate = 0.0;
};

/// Per-iteration mean and 95th percentile (nearest rank) of the relative error across seeds at
/// the single n of cfg.n_grid; runs that stop early are padded with their final error.
RateTable run_rate_experiment(const SweepConfig& cfg);
std::string rate_to_csv(const RateTable& table);

/// True when ||w_tau - w*|| / ||w*|| <= 2^-tau for every recorded tau.
bool within_halving_rate(const SolveTrace& trace);

}  // namespace relupgd
