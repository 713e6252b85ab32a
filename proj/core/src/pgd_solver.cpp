#include "relupgd/pgd_solver.hpp"

#include <cmath>

#include "relupgd/error.hpp"
#include "relupgd/format.hpp"

namespace relupgd {

const char* to_string(GradientRule rule) {
  return rule == GradientRule::kCalibrated ? "calibrated" : "verbatim";
}

GradientRule parse_gradient_rule(const std::string& text) {
  if (text == "calibrated") return GradientRule::kCalibrated;
  if (text == "verbatim") return GradientRule::kVerbatim;
  throw Error(ErrorCode::kConfigParse, "unknown gradient rule '" + text + "' (expected calibrated|verbatim)");
}

SolveResult solve(const Dataset& data, const ConstraintSet& set, const SolveConfig& cfg,
                  const std::optional<WeightVector>& w_star) {
  if (w_star && w_star->dim() != data.d()) {
    throw Error(ErrorCode::kDimensionMismatch, "w_star dimension differs from dataset d");
  }
  if (!(cfg.step_size > 0.0) || !std::isfinite(cfg.step_size)) {
    throw Error(ErrorCode::kInvalidParameter, "step size must be positive");
  }
  const auto gradient = cfg.rule == GradientRule::kCalibrated ? &calibrated_gradient : &generalized_gradient;

  SolveTrace trace;
  trace.target_rel_err = cfg.target_rel_err;
  const double truth_norm = w_star ? norm2(w_star->view()) : 0.0;
  const auto relative_error = [&](const WeightVector& w) {
    const double err = distance(w.view(), w_star->view());
    return truth_norm > 0.0 ? err / truth_norm : err;
  };

  WeightVector w = WeightVector::zeros(data.d());
  trace.losses.push_back(loss(w, data).value);
  if (w_star) {
    trace.rel_err.push_back(relative_error(w));
    if (trace.rel_err.back() <= cfg.target_rel_err) trace.converged_at = 0;
  }

  for (std::size_t tau = 0; tau < cfg.max_iters && !trace.converged_at; ++tau) {
    const GradientVector g = gradient(w, data);
    if (!w_star && norm2(g.entries.view()) <= cfg.gradient_tol) {
      trace.converged_at = tau;
      break;
    }
    WeightVector step = w;
    for (std::size_t j = 0; j < step.dim(); ++j) step[j] -= cfg.step_size * g.entries[j];
    if (!step.all_finite()) {
      throw DivergenceError(tau + 1, "iterate " + std::to_string(tau + 1) + " is not finite");
    }
    w = project(set, step);

    trace.losses.push_back(loss(w, data).value);
    if (w_star) {
      const double prev = trace.rel_err.back();
      const double err = relative_error(w);
      trace.rel_err.push_back(err);
      trace.contraction.push_back(prev > cfg.target_rel_err ? std::optional<double>(err / prev) : std::nullopt);
      if (err <= cfg.target_rel_err) trace.converged_at = tau + 1;
    } else {
      trace.contraction.push_back(std::nullopt);
    }
  }
  return {std::move(w), std::move(trace)};
}

double measure_contraction(const SolveTrace& trace) {
  std::size_t above = 0;
  for (double e : trace.rel_err) above += e > trace.target_rel_err ? 1 : 0;
  if (above < 2) {
    throw Error(ErrorCode::kInsufficientTrace, "need at least two errors above the target to measure contraction");
  }
  double worst = 0.0;
  for (std::size_t tau = 0; tau + 1 < trace.rel_err.size(); ++tau) {
    if (trace.rel_err[tau] > trace.target_rel_err) {
      worst = std::max(worst, trace.rel_err[tau + 1] / trace.rel_err[tau]);
    }
  }
  return worst;
}

std::string trace_to_csv(const SolveTrace& trace) {
  std::string out = "tau,rel_err,loss,contraction\n";
  for (std::size_t tau = 0; tau < trace.losses.size(); ++tau) {
    out += std::to_string(tau);
    out += ',';
    if (tau < trace.rel_err.size()) out += format_double(trace.rel_err[tau]);
    out += ',';
    out += format_double(trace.losses[tau]);
    out += ',';
    if (tau > 0 && trace.contraction[tau - 1]) out += format_double(*trace.contraction[tau - 1]);
    out += '\n';
  }
  return out;
}

}  // namespace relupgd
