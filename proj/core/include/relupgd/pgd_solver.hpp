#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "relupgd/constraint_projections.hpp"
#include "relupgd/loss_gradient.hpp"
#include "relupgd/planted_model.hpp"

namespace relupgd {

enum class GradientRule {
  kCalibrated,  // calibrated_gradient: contracts at unit step (default)
  kVerbatim,    // generalized_gradient: the literal formula, twice as long a step
};

const char* to_string(GradientRule rule);
GradientRule parse_gradient_rule(const std::string& text);

struct SolveConfig {
  std::size_t max_iters = 100;
  double target_rel_err = 1e-12;
  double step_size = 1.0;
  GradientRule rule = GradientRule::kCalibrated;
  /// Gradient-norm stopping level, used only when w* is unknown.
  double gradient_tol = 1e-14;
};

struct SolveTrace {
  /// ||w_tau - w*|| / ||w*|| for tau = 0..T; empty when w* is not supplied.
  std::vector<double> rel_err;
  /// L(w_tau) for tau = 0..T.
  std::vector<double> losses;
  /// rel_err[tau+1] / rel_err[tau] for tau = 0..T-1; empty where rel_err[tau] <= target.
  std::vector<std::optional<double>> contraction;
  std::optional<std::size_t> converged_at;
  double target_rel_err = 0.0;

  std::size_t iterations() const noexcept { return losses.empty() ? 0 : losses.size() - 1; }
};

struct SolveResult {
  WeightVector w;
  SolveTrace trace;
};

/// Projected gradient descent w_{tau+1} = P_K(w_tau - step * grad L(w_tau)) from w_0 = 0.
///
/// Stops after cfg.max_iters steps, or once the relative error reaches cfg.target_rel_err (w*
/// known), or once ||grad L|| <= cfg.gradient_tol (w* unknown). Deterministic given its inputs.
/// Throws kDimensionMismatch, and DivergenceError carrying tau when w_tau becomes non-finite.
SolveResult solve(const Dataset& data, const ConstraintSet& set, const SolveConfig& cfg,
                  const std::optional<WeightVector>& w_star = std::nullopt);

/// Worst observed per-step ratio max_tau rel_err[tau+1] / rel_err[tau] over the steps whose
/// starting error exceeds the trace's target. Throws kInsufficientTrace unless at least two
/// error entries are above target.
double measure_contraction(const SolveTrace& trace);

/// CSV with header "tau,rel_err,loss,contraction"; contraction is blank at tau = 0 and where
/// undefined, rel_err is blank when w* was not supplied.
std::string trace_to_csv(const SolveTrace& trace);

}  // namespace relupgd
