#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "relupgd/cone_geometry.hpp"
#include "relupgd/empirical_verifier.hpp"
#include "relupgd/error.hpp"
#include "relupgd/experiment_harness.hpp"
#include "relupgd/pgd_solver.hpp"
#include "relupgd/planted_model.hpp"

namespace relupgd::cli {
namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigParse, "cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigParse, path + ": " + e.what());
  }
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// --- verify config -------------------------------------------------------------------------

struct VerifyConfig {
  json raw;

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!raw.contains(key)) return fallback;
    try {
      return raw.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::kConfigParse, "field '" + key + "': wrong type");
    }
  }
  template <typename T>
  T require(const std::string& key) const {
    if (!raw.contains(key)) throw Error(ErrorCode::kConfigParse, "field '" + key + "': required");
    return get<T>(key, T{});
  }
};

VerifyConfig load_verify_config(const std::string& path, const std::set<std::string>& allowed) {
  VerifyConfig cfg{read_json_file(path)};
  if (!cfg.raw.is_object()) throw Error(ErrorCode::kConfigParse, "verify config must be a JSON object");
  for (const auto& [key, value] : cfg.raw.items()) {
    if (!allowed.contains(key)) throw Error(ErrorCode::kConfigParse, "field '" + key + "': unknown field");
  }
  return cfg;
}

DescentConeDescriptor cone_from(const VerifyConfig& cfg) {
  const auto kind = parse_cone_kind(cfg.get<std::string>("cone", "subspace"));
  const auto d = cfg.require<std::size_t>("d");
  const auto s = cfg.get<std::size_t>("s", d);
  return DescentConeDescriptor::canonical(kind, d, s);
}

ConcentrationParams concentration_from(const VerifyConfig& cfg, std::size_t n) {
  ConcentrationParams p;
  p.n = n;
  p.delta = cfg.require<double>("delta");
  p.trials = cfg.get<std::size_t>("trials", 200);
  p.seed = cfg.get<std::uint64_t>("seed", 0);
  p.num_directions = cfg.get<std::size_t>("directions", 200);
  return p;
}

// Explicit "s_vector", or n entries with magnitudes drawn from "s_magnitudes" and random signs.
std::vector<double> weights_from(const VerifyConfig& cfg) {
  if (cfg.raw.contains("s_vector")) return cfg.get<std::vector<double>>("s_vector", {});
  const auto magnitudes = cfg.get<std::vector<double>>("s_magnitudes", {1.0});
  if (magnitudes.empty()) throw Error(ErrorCode::kConfigParse, "field 's_magnitudes': must not be empty");
  const auto n = cfg.require<std::size_t>("n");
  StreamRng rng(cfg.get<std::uint64_t>("seed", 0), 0x5745494748ULL);
  std::vector<double> weights(n);
  for (double& w : weights) w = rng.sign() * magnitudes[rng.below(magnitudes.size())];
  return weights;
}

PlantedCheckParams planted_from(const VerifyConfig& cfg) {
  PlantedCheckParams p;
  p.d = cfg.get<std::size_t>("d", 200);
  p.s = cfg.get<std::size_t>("s", 10);
  p.trials = cfg.get<std::size_t>("trials", 100);
  p.seed = cfg.get<std::uint64_t>("seed", 0);
  p.constraint = parse_constraint_kind(cfg.get<std::string>("constraint", "l1"));
  p.num_directions = cfg.get<std::size_t>("directions", 200);
  if (cfg.raw.contains("n")) {
    p.n = cfg.require<std::size_t>("n");
  } else {
    // "n_multiple": n = multiple * ceil(n0), n0 the l1 value (or d when unconstrained).
    const double multiple = cfg.require<double>("n_multiple");
    const double n0 = p.constraint == ConstraintKind::kUnconstrained
                          ? static_cast<double>(p.d)
                          : width_analytic_l1(p.d, p.s);
    p.n = static_cast<std::size_t>(std::ceil(multiple * std::ceil(n0)));
  }
  return p;
}

int finish_report(const CheckReport& report, const std::string& out_path, std::ostream& out) {
  const std::string text = to_json(report);
  if (out_path.empty()) out << text << '\n';
  else write_file(out_path, text + '\n');
  out << report.check_name << ": " << (report.pass ? "pass" : "FAIL") << (report.gated ? "" : " (not gated)")
      << " violations=" << report.violations << "/" << (report.trials - report.skipped)
      << " allowed_fraction=" << report.allowed_fraction << " max_observed=" << report.max_observed << '\n';
  return report.gated && !report.pass ? kExitCheckFailed : kExitOk;
}

int run_verify(const std::string& check, const std::string& config_path, const std::string& out_path,
               std::ostream& out) {
  static const std::set<std::string> concentration_keys = {"cone", "d", "s", "n", "delta", "trials", "seed", "directions"};
  if (check == "ri" || check == "cross") {
    const auto cfg = load_verify_config(config_path, concentration_keys);
    const auto params = concentration_from(cfg, cfg.require<std::size_t>("n"));
    const auto cone = cone_from(cfg);
    return finish_report(check == "ri" ? check_restricted_isometry(cone, params) : check_cross_term(cone, params),
                         out_path, out);
  }
  if (check == "weighted") {
    auto keys = concentration_keys;
    keys.insert({"s_vector", "s_magnitudes"});
    const auto cfg = load_verify_config(config_path, keys);
    const auto weights = weights_from(cfg);
    return finish_report(check_weighted_isometry(weights, cone_from(cfg), concentration_from(cfg, weights.size())),
                         out_path, out);
  }
  if (check == "first-iter" || check == "key-ineq") {
    const auto cfg = load_verify_config(config_path, {"d", "s", "n", "n_multiple", "trials", "seed", "constraint", "directions"});
    const auto params = planted_from(cfg);
    return finish_report(check == "first-iter" ? check_first_iteration(params) : check_key_inequality(params),
                         out_path, out);
  }
  throw Error(ErrorCode::kConfigParse, "unknown check '" + check + "'");
}

// --- other subcommands ---------------------------------------------------------------------

struct GenArgs {
  std::size_t d = 0;
  std::size_t sparsity = 0;  // 0 = dense
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double norm = 1.0;
  std::string out;
};

int run_gen(const GenArgs& a, std::ostream& out) {
  SweepConfig cfg;
  cfg.d = a.d;
  cfg.structure = a.sparsity == 0 ? Structure::kDense : Structure::kSparse;
  cfg.s = a.sparsity;
  cfg.norm = a.norm;
  const SweepInstance inst = make_instance(cfg, a.n, a.seed);
  if (a.out.empty()) out << to_json(inst.data) << '\n';
  else save_dataset(inst.data, a.out);
  return kExitOk;
}

struct SolveArgs {
  std::string data;
  std::string constraint = "none";
  std::string radius = "auto";
  std::size_t k = 0;
  std::size_t iters = 100;
  double step = 1.0;
  double target = 1e-12;
  std::string gradient = "calibrated";
  std::string trace_out;
};

int run_solve(const SolveArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.data);
  ConstraintSpec spec;
  spec.kind = parse_constraint_kind(a.constraint);
  if (a.radius != "auto") {
    try {
      std::size_t used = 0;
      spec.radius = std::stod(a.radius, &used);
      if (used != a.radius.size()) throw std::invalid_argument(a.radius);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfigParse, "--radius expects 'auto' or a positive real, got '" + a.radius + "'");
    }
  }
  spec.k = a.k;
  const ConstraintSet set = spec.resolve(data.w_star());

  SolveConfig cfg;
  cfg.max_iters = a.iters;
  cfg.step_size = a.step;
  cfg.target_rel_err = a.target;
  cfg.rule = parse_gradient_rule(a.gradient);
  const SolveResult result = solve(data, set, cfg, data.w_star());
  if (!a.trace_out.empty()) write_file(a.trace_out, trace_to_csv(result.trace));

  json summary = {{"constraint", set.describe()},
                  {"gradient", to_string(cfg.rule)},
                  {"iterations", result.trace.iterations()},
                  {"final_loss", result.trace.losses.back()},
                  {"w", result.w.entries()}};
  summary["converged_at"] = result.trace.converged_at ? json(*result.trace.converged_at) : json(nullptr);
  if (!result.trace.rel_err.empty()) {
    summary["final_rel_err"] = result.trace.rel_err.back();
    std::optional<double> contraction;
    try {
      contraction = measure_contraction(result.trace);
    } catch (const Error&) {
    }
    summary["contraction_max"] = nullable(contraction);
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

struct WidthArgs {
  std::size_t d = 0;
  std::size_t sparsity = 0;
  std::string kind = "l1";
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};

int run_width(const WidthArgs& a, std::ostream& out) {
  const std::size_t s = a.sparsity == 0 ? a.d : a.sparsity;
  const ConeKind kind = parse_cone_kind(a.kind);
  if (kind != ConeKind::kL1 && kind != ConeKind::kSubspace && kind != ConeKind::kFullSpace) {
    throw Error(ErrorCode::kConfigParse, "--kind expects l1|subspace|none");
  }
  const auto cone = DescentConeDescriptor::canonical(kind, a.d, s);
  const WidthEstimate est = estimate_width_mc(cone, a.samples, a.seed);
  json j = {{"d", a.d},
            {"s", s},
            {"kind", a.kind},
            {"n0", est.n0},
            {"omega_sq_mc", est.omega_sq_mc},
            {"stderr", est.stderr_mc},
            {"num_samples", est.num_samples},
            {"seed", est.seed}};
  j["omega_sq_analytic"] = nullable(est.omega_sq_analytic);
  out << j.dump() << '\n';
  return kExitOk;
}

std::string json_sibling(const std::string& path) {
  const auto dot = path.rfind('.');
  const auto slash = path.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot) + ".json";
  return path + ".json";
}

int run_sweep_cmd(const std::string& config, const std::string& out_path, std::ostream& out) {
  const SweepConfig cfg = load_sweep_config(config);
  const SweepResult result = run_sweep(cfg);
  write_file(out_path, sweep_to_csv(result));
  write_file(json_sibling(out_path), sweep_to_json(result));
  out << "n0 = " << result.n0 << '\n';
  for (const auto& p : success_curve(result)) out << "n = " << p.n << "  success = " << p.fraction << '\n';
  return kExitOk;
}

int run_rate_cmd(const std::string& config, const std::string& out_path, std::ostream& out) {
  const RateTable table = run_rate_experiment(load_sweep_config(config));
  const std::string csv = rate_to_csv(table);
  if (out_path.empty()) out << csv;
  else write_file(out_path, csv);
  out << "n = " << table.n << " (n0 = " << table.n0 << "), runs = " << table.runs
      << ", within 2^-tau at every tau: " << table.fraction_within_rate
      << ", contraction <= 1/2: " << table.fraction_contracting << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projected gradient descent for planted ReLU regression under structured constraints"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a planted dataset as JSON");
  gen_cmd->add_option("--d", gen.d, "Dimension")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--sparsity", gen.sparsity, "Nonzeros in w* (omit for dense)");
  gen_cmd->add_option("--n", gen.n, "Samples")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--norm", gen.norm, "||w*||_2")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", gen.out, "Output path (stdout if omitted)");

  SolveArgs sol;
  auto* solve_cmd = app.add_subcommand("solve", "Run projected gradient descent on a dataset");
  solve_cmd->add_option("--data", sol.data, "Dataset JSON")->required();
  solve_cmd->add_option("--constraint", sol.constraint, "none|l1|l2|sparsity")
      ->check(CLI::IsMember({"none", "l1", "l2", "sparsity"}));
  solve_cmd->add_option("--radius", sol.radius, "auto or a positive real");
  solve_cmd->add_option("--k", sol.k, "Sparsity level (0 = auto)");
  solve_cmd->add_option("--iters", sol.iters, "Maximum iterations");
  solve_cmd->add_option("--step", sol.step, "Step size")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--target", sol.target, "Relative-error stopping target");
  solve_cmd->add_option("--gradient", sol.gradient, "calibrated|verbatim")
      ->check(CLI::IsMember({"calibrated", "verbatim"}));
  solve_cmd->add_option("--trace-out", sol.trace_out, "Trace CSV path");

  WidthArgs width;
  auto* width_cmd = app.add_subcommand("width", "Estimate the minimal sample count n0");
  width_cmd->add_option("--d", width.d, "Dimension")->required()->check(CLI::PositiveNumber);
  width_cmd->add_option("--sparsity", width.sparsity, "Support size (omit for d)");
  width_cmd->add_option("--kind", width.kind, "l1|subspace|none")->check(CLI::IsMember({"l1", "subspace", "none"}));
  width_cmd->add_option("--samples", width.samples, "Monte Carlo samples");
  width_cmd->add_option("--seed", width.seed, "Seed");

  std::string sweep_config;
  std::string sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an (n, seed) sweep; writes CSV and a JSON mirror");
  sweep_cmd->add_option("--config", sweep_config, "Sweep config JSON")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV output path")->required();

  std::string rate_config;
  std::string rate_out;
  auto* rate_cmd = app.add_subcommand("rate", "Per-iteration error table at a single n");
  rate_cmd->add_option("--config", rate_config, "Sweep config JSON with one n_grid entry")->required();
  rate_cmd->add_option("--out", rate_out, "CSV output path (stdout if omitted)");

  std::string check;
  std::string verify_config;
  std::string verify_out;
  auto* verify_cmd = app.add_subcommand("verify", "Run one empirical concentration or contraction check");
  verify_cmd->add_option("--check", check, "ri|cross|weighted|first-iter|key-ineq")
      ->required()
      ->check(CLI::IsMember({"ri", "cross", "weighted", "first-iter", "key-ineq"}));
  verify_cmd->add_option("--config", verify_config, "Check parameters JSON")->required();
  verify_cmd->add_option("--out", verify_out, "Report JSON path (stdout if omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (*gen_cmd) return run_gen(gen, out);
    if (*solve_cmd) return run_solve(sol, out);
    if (*width_cmd) return run_width(width, out);
    if (*sweep_cmd) return run_sweep_cmd(sweep_config, sweep_out, out);
    if (*rate_cmd) return run_rate_cmd(rate_config, rate_out, out);
    if (*verify_cmd) return run_verify(check, verify_config, verify_out, out);
  } catch (const DivergenceError& e) {
    err << e.what() << " (iteration " << e.iteration() << ")\n";
    return kExitDiverged;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace relupgd::cli
