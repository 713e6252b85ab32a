#include "relupgd/experiment_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "relupgd/cone_geometry.hpp"
#include "relupgd/error.hpp"
#include "relupgd/format.hpp"
#include "relupgd/rng.hpp"

namespace relupgd {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kConfigParse, "field '" + field + "': " + what);
}

std::size_t positive_int(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) config_error(field, "expected a positive integer");
  return j.get<std::size_t>();
}

double positive_real(const json& j, const std::string& field) {
  if (!j.is_number() || !(j.get<double>() > 0.0)) config_error(field, "expected a positive number");
  return j.get<double>();
}

NGridEntry parse_grid_entry(const json& j, std::size_t index) {
  const std::string field = "n_grid[" + std::to_string(index) + "]";
  if (j.is_number_integer()) return NGridEntry::literal(positive_int(j, field));
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    if (text.size() >= 2 && text[0] == 'x') {
      try {
        std::size_t used = 0;
        const double factor = std::stod(text.substr(1), &used);
        if (used == text.size() - 1 && factor > 0.0 && std::isfinite(factor)) return NGridEntry::multiple(factor);
      } catch (const std::exception&) {
      }
    }
    config_error(field, "expected an integer or a multiplier like \"x2\", got \"" + text + "\"");
  }
  config_error(field, "expected an integer or a multiplier string");
}

ConeKind cone_for(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::kUnconstrained: return ConeKind::kFullSpace;
    case ConstraintKind::kL2Ball: return ConeKind::kL2;
    case ConstraintKind::kL1Ball: return ConeKind::kL1;
    case ConstraintKind::kSparsity: return ConeKind::kSparsity;
  }
  return ConeKind::kFullSpace;
}

std::string grid_entry_json(const NGridEntry& e) {
  if (const auto* n = std::get_if<std::size_t>(&e.value)) return std::to_string(*n);
  return "x" + format_double(std::get<double>(e.value));
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigParse, std::string("sweep config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfigParse, "sweep config must be a JSON object");

  static const std::set<std::string> known = {"d",      "structure",       "s",         "norm",
                                              "constraint", "radius",     "k",         "n_grid",
                                              "seeds",  "max_iters",       "success_rel_err",
                                              "step_size", "gradient",   "workers"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) config_error(key, "unknown field");
  }

  SweepConfig cfg;
  if (j.contains("d")) cfg.d = positive_int(j["d"], "d");
  if (j.contains("structure")) {
    const auto& v = j["structure"];
    if (v == "sparse") cfg.structure = Structure::kSparse;
    else if (v == "dense") cfg.structure = Structure::kDense;
    else config_error("structure", "expected \"sparse\" or \"dense\"");
  }
  if (j.contains("s")) cfg.s = positive_int(j["s"], "s");
  if (cfg.structure == Structure::kSparse && cfg.s > cfg.d) config_error("s", "must not exceed d");
  if (j.contains("norm")) cfg.norm = positive_real(j["norm"], "norm");
  if (j.contains("constraint")) {
    if (!j["constraint"].is_string()) config_error("constraint", "expected a string");
    try {
      cfg.constraint.kind = parse_constraint_kind(j["constraint"].get<std::string>());
    } catch (const Error& e) {
      config_error("constraint", e.what());
    }
  }
  if (j.contains("radius")) {
    const auto& v = j["radius"];
    if (v.is_string() && v == "auto") cfg.constraint.radius.reset();
    else cfg.constraint.radius = positive_real(v, "radius");
  }
  if (j.contains("k")) {
    if (j["k"].is_string() && j["k"] == "auto") cfg.constraint.k = 0;
    else cfg.constraint.k = positive_int(j["k"], "k");
  }
  if (!j.contains("n_grid") || !j["n_grid"].is_array()) config_error("n_grid", "required list");
  for (std::size_t i = 0; i < j["n_grid"].size(); ++i) cfg.n_grid.push_back(parse_grid_entry(j["n_grid"][i], i));
  if (cfg.n_grid.empty()) config_error("n_grid", "must not be empty");

  if (!j.contains("seeds")) config_error("seeds", "required (a list of seeds or a count)");
  const auto& seeds = j["seeds"];
  if (seeds.is_number_integer()) {
    const std::size_t count = positive_int(seeds, "seeds");
    for (std::size_t i = 0; i < count; ++i) cfg.seeds.push_back(i);
  } else if (seeds.is_array() && !seeds.empty()) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!seeds[i].is_number_unsigned()) config_error("seeds[" + std::to_string(i) + "]", "expected a nonnegative integer");
      cfg.seeds.push_back(seeds[i].get<std::uint64_t>());
    }
  } else {
    config_error("seeds", "expected a nonempty list or a positive count");
  }

  if (j.contains("max_iters")) cfg.max_iters = positive_int(j["max_iters"], "max_iters");
  if (j.contains("success_rel_err")) cfg.success_rel_err = positive_real(j["success_rel_err"], "success_rel_err");
  if (j.contains("step_size")) cfg.step_size = positive_real(j["step_size"], "step_size");
  if (j.contains("gradient")) {
    if (!j["gradient"].is_string()) config_error("gradient", "expected a string");
    try {
      cfg.gradient = parse_gradient_rule(j["gradient"].get<std::string>());
    } catch (const Error& e) {
      config_error("gradient", e.what());
    }
  }
  if (j.contains("workers")) cfg.workers = positive_int(j["workers"], "workers");
  return cfg;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigParse, "cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_sweep_config(buffer.str());
}

double sweep_n0(const SweepConfig& cfg) {
  return minimal_samples(DescentConeDescriptor::canonical(cone_for(cfg.constraint.kind), cfg.d, cfg.sparsity()),
                         WidthMethod::kAuto);
}

std::vector<std::size_t> resolve_n_grid(const SweepConfig& cfg, double n0) {
  const double base = std::ceil(n0);
  std::vector<std::size_t> out;
  for (const auto& entry : cfg.n_grid) {
    if (const auto* n = std::get_if<std::size_t>(&entry.value)) {
      out.push_back(*n);
    } else {
      out.push_back(static_cast<std::size_t>(std::max(1.0, std::ceil(std::get<double>(entry.value) * base))));
    }
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) {
      throw Error(ErrorCode::kConfigParse, "field 'n_grid': resolves to a non-increasing sequence at entry " +
                                               std::to_string(i) + " (" + grid_entry_json(cfg.n_grid[i]) + ")");
    }
  }
  return out;
}

SweepInstance make_instance(const SweepConfig& cfg, std::size_t n, std::uint64_t seed) {
  const PlantedSpec spec = cfg.structure == Structure::kDense
                               ? PlantedSpec::dense(cfg.d, cfg.norm, derive_seed(seed, 0))
                               : PlantedSpec::sparse(cfg.d, cfg.s, cfg.norm, derive_seed(seed, 0));
  WeightVector w_star = make_planted(spec);
  Dataset data = generate(w_star, n, derive_seed(seed, 1));
  return {std::move(w_star), std::move(data)};
}

namespace {

SolveConfig solve_config(const SweepConfig& cfg) {
  SolveConfig sc;
  sc.max_iters = cfg.max_iters;
  sc.step_size = cfg.step_size;
  sc.rule = cfg.gradient;
  return sc;
}

SweepRow run_one(const SweepConfig& cfg, double n0, std::size_t n, std::uint64_t seed) {
  SweepRow row;
  row.seed = seed;
  row.d = cfg.d;
  row.s = cfg.sparsity();
  row.n = n;
  row.n0 = n0;
  row.constraint = to_string(cfg.constraint.kind);
  const SweepInstance inst = make_instance(cfg, n, seed);
  const ConstraintSet set = cfg.constraint.resolve(inst.w_star);
  try {
    const SolveResult result = solve(inst.data, set, solve_config(cfg), inst.w_star);
    row.iters_run = result.trace.iterations();
    row.final_rel_err = result.trace.rel_err.back();
    try {
      row.contraction_max = measure_contraction(result.trace);
    } catch (const Error&) {
    }
  } catch (const DivergenceError& e) {
    row.iters_run = e.iteration();
    row.final_rel_err = std::numeric_limits<double>::infinity();
  }
  row.success = row.final_rel_err <= cfg.success_rel_err;
  return row;
}

// Runs job(i) for i in [0, count) on `workers` threads; job writes to its own slot.
template <typename Job>
void parallel_for(std::size_t count, std::size_t workers, Job job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          job(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
  SweepResult result;
  result.n0 = sweep_n0(cfg);
  result.n_values = resolve_n_grid(cfg, result.n0);
  const std::size_t per_n = cfg.seeds.size();
  result.rows.resize(result.n_values.size() * per_n);
  parallel_for(result.rows.size(), cfg.workers, [&](std::size_t i) {
    result.rows[i] = run_one(cfg, result.n0, result.n_values[i / per_n], cfg.seeds[i % per_n]);
  });
  return result;
}

std::vector<SuccessPoint> success_curve(const SweepResult& result) {
  std::vector<SuccessPoint> curve;
  for (std::size_t n : result.n_values) {
    std::size_t total = 0;
    std::size_t ok = 0;
    for (const auto& row : result.rows) {
      if (row.n != n) continue;
      ++total;
      ok += row.success ? 1 : 0;
    }
    curve.push_back({n, total == 0 ? 0.0 : static_cast<double>(ok) / static_cast<double>(total)});
  }
  return curve;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::string out = "seed,d,s,n,n0,constraint,iters_run,final_rel_err,success,contraction_max\n";
  for (const auto& r : result.rows) {
    out += std::to_string(r.seed) + ',' + std::to_string(r.d) + ',' + std::to_string(r.s) + ',' +
           std::to_string(r.n) + ',' + format_double(r.n0) + ',' + r.constraint + ',' + std::to_string(r.iters_run) +
           ',' + format_double(r.final_rel_err) + ',' + (r.success ? "true" : "false") + ',' +
           (r.contraction_max ? format_double(*r.contraction_max) : std::string()) + '\n';
  }
  return out;
}

std::string sweep_to_json(const SweepResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    json row = {{"seed", r.seed},           {"d", r.d},
                {"s", r.s},                 {"n", r.n},
                {"n0", r.n0},               {"constraint", r.constraint},
                {"iters_run", r.iters_run}, {"success", r.success}};
    // JSON has no infinity; a diverged run is written as null.
    row["final_rel_err"] = std::isfinite(r.final_rel_err) ? json(r.final_rel_err) : json(nullptr);
    row["contraction_max"] = r.contraction_max ? json(*r.contraction_max) : json(nullptr);
    rows.push_back(std::move(row));
  }
  json curve = json::array();
  for (const auto& p : success_curve(result)) curve.push_back({{"n", p.n}, {"success_fraction", p.fraction}});
  return json{{"n0", result.n0}, {"n_values", result.n_values}, {"success_curve", curve}, {"rows", rows}}.dump(2);
}

bool within_halving_rate(const SolveTrace& trace) {
  for (std::size_t tau = 0; tau < trace.rel_err.size(); ++tau) {
    if (trace.rel_err[tau] > std::ldexp(1.0, -static_cast<int>(tau))) return false;
  }
  return !trace.rel_err.empty();
}

RateTable run_rate_experiment(const SweepConfig& cfg) {
  if (cfg.n_grid.size() != 1) {
    throw Error(ErrorCode::kConfigParse, "field 'n_grid': the rate experiment takes exactly one sample size");
  }
  RateTable table;
  table.n0 = sweep_n0(cfg);
  table.n = resolve_n_grid(cfg, table.n0).front();
  table.runs = cfg.seeds.size();

  std::vector<SolveTrace> traces(cfg.seeds.size());
  parallel_for(traces.size(), cfg.workers, [&](std::size_t i) {
    const SweepInstance inst = make_instance(cfg, table.n, cfg.seeds[i]);
    traces[i] = solve(inst.data, cfg.constraint.resolve(inst.w_star), solve_config(cfg), inst.w_star).trace;
  });

  std::size_t contracting = 0;
  std::size_t within = 0;
  std::size_t length = 0;
  for (const auto& trace : traces) {
    length = std::max(length, trace.rel_err.size());
    within += within_halving_rate(trace) ? 1 : 0;
    try {
      contracting += measure_contraction(trace) <= 0.5 ? 1 : 0;
    } catch (const Error&) {
      contracting += trace.converged_at ? 1 : 0;
    }
  }
  const double runs = static_cast<double>(traces.size());
  table.fraction_contracting = static_cast<double>(contracting) / runs;
  table.fraction_within_rate = static_cast<double>(within) / runs;

  std::vector<double> column(traces.size());
  for (std::size_t tau = 0; tau < length; ++tau) {
    double sum = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto& err = traces[i].rel_err;
      column[i] = tau < err.size() ? err[tau] : err.back();
      sum += column[i];
    }
    std::sort(column.begin(), column.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * runs));
    table.rows.push_back({tau, sum / runs, column[std::max<std::size_t>(rank, 1) - 1]});
  }
  return table;
}

std::string rate_to_csv(const RateTable& table) {
  std::string out = "tau,mean_rel_err,p95_rel_err\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.tau) + ',' + format_double(r.mean_rel_err) + ',' + format_double(r.p95_rel_err) + '\n';
  }
  return out;
}

}  // namespace relupgd
