#include "passage/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "passage/acceptance.hpp"
#include "passage/analytic.hpp"
#include "passage/errors.hpp"
#include "passage/montecarlo.hpp"
#include "passage/npass.hpp"
#include "passage/transformed.hpp"

#ifndef PASSAGE_VERSION
#define PASSAGE_VERSION "0.0.0"
#endif

namespace passage {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Request {
  std::string command;
  std::string model = "bm";
  std::string quantity = "tau1";
  double a = 1.0;
  double x = 0.0;
  std::optional<double> b;
  std::optional<double> mu;
  std::optional<double> sigma;
  std::size_t n = 3;
  std::string grid;
  std::string b_sweep;
  std::string lambda_grid;
  double horizon = 1.0;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::size_t paths = 100000;
  double dt = 1e-3;
  double t_max = 100.0;
  std::size_t workers = 1;
  bool bridge = false;
  bool euler = false;
  bool samples = false;
};

// A computed table: one abscissa column and one or more value columns.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  std::optional<double> defect_mass;
  json extra = json::object();
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) parts.push_back(item);
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError(what + ": not a number: '" + s + "'");
  }
}

std::size_t parse_count(const std::string& s, const std::string& what) {
  const double v = parse_double(s, what);
  if (!(v >= 2.0) || v != std::floor(v)) throw ParameterError(what + ": point count must be an integer >= 2");
  return static_cast<std::size_t>(v);
}

/// "lo:hi:n:lin|log", lo > 0.
std::vector<double> parse_grid(const std::string& spec, const std::string& what) {
  const auto parts = split(spec, ':');
  if (parts.size() != 4) throw ParameterError(what + ": expected lo:hi:points:lin|log");
  const double lo = parse_double(parts[0], what);
  const double hi = parse_double(parts[1], what);
  const std::size_t n = parse_count(parts[2], what);
  if (!(lo > 0.0) || !(hi > lo)) throw ParameterError(what + ": need 0 < lo < hi");
  if (parts[3] == "log") return log_grid(lo, hi, n);
  if (parts[3] == "lin") return linear_grid(lo, hi, n);
  throw ParameterError(what + ": spacing must be lin or log");
}

/// "lo:hi:n", linear, any sign.
std::vector<double> parse_sweep(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw ParameterError("--b-sweep: expected lo:hi:points");
  const double lo = parse_double(parts[0], "--b-sweep");
  const double hi = parse_double(parts[1], "--b-sweep");
  return linear_grid(lo, hi, parse_count(parts[2], "--b-sweep"));
}

ModelSpec build_model(const Request& r) {
  if (r.model != "bm" && r.b && *r.b != 0.0) throw ParameterError("--b applies to --model bm only");
  if (r.model != "ou" && (r.mu || r.sigma)) throw ParameterError("--mu/--sigma apply to --model ou only");
  ModelSpec m;
  if (r.model == "bm") {
    m = ModelSpec::bm(r.a, r.x, r.b.value_or(0.0));
  } else if (r.model == "cir") {
    m = ModelSpec::conjugated(SpaceTransform::cir(), r.a, r.x);
  } else if (r.model == "wf") {
    m = ModelSpec::conjugated(SpaceTransform::wright_fisher(), r.a, r.x);
  } else if (r.model == "cubic") {
    m = ModelSpec::time_changed(TimeChange::cubic(), r.a, r.x);
  } else if (r.model == "ou") {
    if (!r.mu || !r.sigma) throw ParameterError("--model ou requires --mu and --sigma");
    m = ModelSpec::ornstein_uhlenbeck(*r.mu, *r.sigma, r.a, r.x);
  } else {
    throw ParameterError("unknown model '" + r.model + "'");
  }
  m.validate();
  return m;
}

std::uint64_t effective_seed(const Request& r, const char* seed_env) {
  if (r.seed) return *r.seed;
  if (seed_env != nullptr && *seed_env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(seed_env, &used);
      if (used == std::string(seed_env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ParameterError(std::string("PASSAGE_SEED: not an unsigned integer: '") + seed_env + "'");
  }
  return kDefaultSeed;
}

bool is_time_changed(const ModelSpec& m) { return m.kind == ModelKind::time_changed; }

std::vector<double> require_grid(const Request& r) {
  if (r.grid.empty()) throw ParameterError("--grid is required");
  return parse_grid(r.grid, "--grid");
}

void require_order(const Request& r) {
  if (r.n < 1 || r.n > kMaxPassageOrder) throw ParameterError("--n must be in [1, 6]");
}

Table density_table(const Request& r, const ModelSpec& m) {
  const std::vector<double> grid = require_grid(r);
  const LinearBoundaryProblem p = m.bm_problem();
  const bool tc = is_time_changed(m);
  Table t{{"t", "value"}, {grid, {}}, std::nullopt};
  std::vector<double>& values = t.columns[1];

  if (r.quantity == "taun") {
    require_order(r);
    const DensityCurve c = tc ? tc_nth_passage(m, r.n, grid) : nth_passage_density(p, r.n, grid);
    values = c.values();
    t.defect_mass = c.defect_mass();
    t.extra["label"] = c.label();
    t.extra["resolution_warning"] = c.resolution_warning();
    return t;
  }
  for (double s : grid) {
    if (r.quantity == "tau1") {
      values.push_back(tc ? tc_tau1_density(m, s) : fpt_density(p, s));
    } else if (r.quantity == "tau2") {
      values.push_back(tc ? tc_tau2_density(m, s) : tau2_density(p, s));
    } else if (r.quantity == "t2") {
      values.push_back(tc ? tc_t2_density(m, s) : t2_density(p, s));
    } else {
      throw ParameterError("density: --quantity must be tau1, tau2, t2 or taun");
    }
  }
  if (r.quantity == "tau1") {
    t.defect_mass = tc ? 1.0 - tc_tau1_cdf(m, kInf) : 1.0 - hit_probability(p);
  } else {
    t.defect_mass = tc ? tc_t2_defect(m) : t2_defect(p);
  }
  return t;
}

Table cdf_table(const Request& r, const ModelSpec& m) {
  const std::vector<double> grid = require_grid(r);
  const LinearBoundaryProblem p = m.bm_problem();
  const bool tc = is_time_changed(m);
  Table t{{"t", "value"}, {grid, {}}, std::nullopt};
  std::vector<double>& values = t.columns[1];
  if (r.quantity == "lambda") {
    if (m.kind != ModelKind::bm_linear) throw ParameterError("cdf lambda: --model bm only");
    for (double z : grid) values.push_back(last_passage_cdf(p, r.horizon, std::min(z, r.horizon)).value);
    t.extra["horizon"] = r.horizon;
    return t;
  }
  if (tc && r.quantity != "tau1") throw ParameterError("cdf: time-changed models support tau1 only");
  for (double s : grid) {
    if (r.quantity == "tau1") {
      values.push_back(tc ? tc_tau1_cdf(m, s) : fpt_cdf(p, s));
    } else if (r.quantity == "t2") {
      values.push_back(t2_cdf(p, s));
    } else if (r.quantity == "taun") {
      require_order(r);
      values.push_back(tn_cdf(p, r.n, s));
    } else {
      throw ParameterError("cdf: --quantity must be tau1, t2, taun or lambda");
    }
  }
  return t;
}

Table defect_table(const Request& r, const ModelSpec& m) {
  Table t{{"b", "defect", "gamma_bound"}, {{}, {}, {}}, std::nullopt};
  if (!r.b_sweep.empty()) {
    if (m.kind != ModelKind::bm_linear) throw ParameterError("--b-sweep: --model bm only");
    for (double b : parse_sweep(r.b_sweep)) {
      const LinearBoundaryProblem p{.a = r.a, .b = b, .x = r.x};
      t.columns[0].push_back(b);
      t.columns[1].push_back(t2_defect(p));
      t.columns[2].push_back(gamma_bound(p));
    }
    return t;
  }
  const LinearBoundaryProblem p = m.bm_problem();
  t.columns[0].push_back(p.b);
  t.columns[1].push_back(is_time_changed(m) ? tc_t2_defect(m) : t2_defect(p));
  t.columns[2].push_back(gamma_bound(p));
  return t;
}

Table mean_table(const Request& r, const ModelSpec& m, std::ostream& err) {
  if (r.quantity != "tau1") throw ParameterError("mean: --quantity must be tau1");
  double value = 0.0;
  switch (m.kind) {
    case ModelKind::bm_linear:
      value = fpt_mean(m.bm_problem());
      break;
    case ModelKind::conjugated:
      value = kInf;
      break;
    case ModelKind::time_changed: {
      const MeanEstimate e = tc_tau1_mean(m);
      value = e.value;
      if (!std::isfinite(value)) err << "mean: " << e.diagnostic << '\n';
      break;
    }
  }
  return {{"quantity", "value"}, {{}, {value}}, std::nullopt, {{"quantity", "tau1"}}};
}

Table laplace_table(const Request& r, const ModelSpec& m) {
  if (r.lambda_grid.empty()) throw ParameterError("--lambda-grid is required");
  const std::vector<double> lambdas = parse_grid(r.lambda_grid, "--lambda-grid");
  const LinearBoundaryProblem p = m.bm_problem();
  const bool tc = is_time_changed(m);
  Table t{{"lambda", "value"}, {lambdas, {}}, std::nullopt};
  for (double l : lambdas) {
    if (r.quantity == "tau1") {
      t.columns[1].push_back(tc ? tc_laplace(m, PassageIndex::tau1, l) : fpt_laplace_closed(p, l));
    } else if (r.quantity == "tau2") {
      t.columns[1].push_back(tc ? tc_laplace(m, PassageIndex::tau2, l) : tau2_laplace(p, l));
    } else {
      throw ParameterError("lt: --quantity must be tau1 or tau2");
    }
  }
  return t;
}

Table psi_table(const Request& r, const ModelSpec& m) {
  if (m.kind != ModelKind::bm_linear) throw ParameterError("psi: --model bm only");
  const std::vector<double> grid = require_grid(r);
  Table t{{"t", "value"}, {grid, {}}, std::nullopt, {{"horizon", r.horizon}}};
  const LinearBoundaryProblem p = m.bm_problem();
  for (double u : grid) {
    if (!(u < r.horizon)) throw ParameterError("psi: grid must lie inside (0, --t)");
    t.columns[1].push_back(last_passage_density(p, r.horizon, u));
  }
  return t;
}

json params_json(const Request& r) {
  json p = {{"a", r.a}, {"x", r.x}, {"quantity", r.quantity}};
  if (r.b) p["b"] = *r.b;
  if (r.mu) p["mu"] = *r.mu;
  if (r.sigma) p["sigma"] = *r.sigma;
  if (r.quantity == "taun") p["n"] = r.n;
  return p;
}

void emit(const Request& r, const Table& t, std::uint64_t seed, std::ostream& out) {
  for (const auto& column : t.columns) {
    for (double v : column) {
      if (std::isnan(v)) throw NumericalError("result contains NaN");
    }
  }
  if (r.format == "json") {
    json j;
    j["model"] = r.model;
    j["params"] = params_json(r);
    j["grid"] = t.columns[0];
    j["values"] = t.columns[1];
    for (std::size_t c = 2; c < t.columns.size(); ++c) j[t.header[c]] = t.columns[c];
    j["defect_mass"] = t.defect_mass ? json(*t.defect_mass) : json(nullptr);
    j["meta"] = {{"version", PASSAGE_VERSION}, {"seed", seed}};
    for (const auto& [k, v] : t.extra.items()) j["meta"][k] = v;
    out << j.dump(2) << '\n';
    return;
  }
  for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
  out << '\n';
  const std::size_t rows = t.columns[1].size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (c) out << ',';
      if (c == 0 && t.columns[0].empty()) {
        out << t.extra.value("quantity", "");
      } else {
        out << num(t.columns[c][i]);
      }
    }
    out << '\n';
  }
}

int run_mc(const Request& r, const ModelSpec& m, std::uint64_t seed, std::ostream& out,
           std::ostream& err) {
  if (r.quantity != "tau1") throw ParameterError("mc: --quantity must be tau1");
  McConfig cfg;
  cfg.n_paths = r.paths;
  cfg.dt = r.dt;
  cfg.t_max = r.t_max;
  cfg.base_seed = seed;
  cfg.workers = r.workers;
  cfg.bridge_correction = r.bridge;
  cfg.euler = r.euler;
  const SampleSet s = simulate_tau1(m, cfg);
  if (s.estimate.censored_fraction > 0.0) {
    err << "mc: mean is conditional on hitting before t_max; censored fraction "
        << num(s.estimate.censored_fraction) << '\n';
  }
  if (r.samples) {
    write_samples(out, s.samples);
    return kExitOk;
  }
  const EstimateCI& e = s.estimate;
  if (r.format == "json") {
    json j;
    j["model"] = r.model;
    j["params"] = params_json(r);
    j["params"]["paths"] = r.paths;
    j["params"]["dt"] = r.dt;
    j["params"]["t_max"] = r.t_max;
    j["estimate"] = {{"mean", std::isfinite(e.mean) ? json(e.mean) : json(nullptr)},
                     {"half_width_95", std::isfinite(e.half_width_95) ? json(e.half_width_95) : json(nullptr)},
                     {"n_effective", e.n_effective},
                     {"censored_fraction", e.censored_fraction}};
    j["meta"] = {{"version", PASSAGE_VERSION}, {"seed", seed}};
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  out << "statistic,value\n"
      << "mean," << num(e.mean) << '\n'
      << "half_width_95," << num(e.half_width_95) << '\n'
      << "n_effective," << e.n_effective << '\n'
      << "censored_fraction," << num(e.censored_fraction) << '\n';
  return kExitOk;
}

void add_model_options(CLI::App* cmd, Request& r) {
  cmd->add_option("--model", r.model, "bm | cir | wf | cubic | ou")
      ->check(CLI::IsMember({"bm", "cir", "wf", "cubic", "ou"}));
  cmd->add_option("--a", r.a, "barrier (intercept for bm)");
  cmd->add_option("--x", r.x, "starting point");
  cmd->add_option("--b", r.b, "barrier slope (bm)");
  cmd->add_option("--mu", r.mu, "OU mean reversion rate");
  cmd->add_option("--sigma", r.sigma, "OU volatility");
  cmd->add_option("--format", r.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", r.seed, "base seed (overrides PASSAGE_SEED)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const char* seed_env) {
  Request r;
  CLI::App app{"First-, second- and nth-passage times of Brownian motion and its transforms", "passage"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PASSAGE_VERSION);

  CLI::App* density = app.add_subcommand("density", "density curve on a time grid");
  CLI::App* cdf = app.add_subcommand("cdf", "distribution function on a time grid");
  CLI::App* defect = app.add_subcommand("defect", "P(T2 = inf) and its Jensen bound");
  CLI::App* mean = app.add_subcommand("mean", "mean first-passage time");
  CLI::App* lt = app.add_subcommand("lt", "Laplace transform on a lambda grid");
  CLI::App* psi = app.add_subcommand("psi", "last-passage density on (0, t)");
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo first-passage times");
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance suite");

  for (CLI::App* cmd : {density, cdf, defect, mean, lt, psi, mc}) add_model_options(cmd, r);
  for (CLI::App* cmd : {density, cdf, mean, lt, mc}) {
    cmd->add_option("--quantity", r.quantity, "tau1 | tau2 | taun | t2 | lambda")
        ->check(CLI::IsMember({"tau1", "tau2", "taun", "t2", "lambda"}));
  }
  for (CLI::App* cmd : {density, cdf}) cmd->add_option("--n", r.n, "passage order for taun");
  for (CLI::App* cmd : {density, cdf, psi}) cmd->add_option("--grid", r.grid, "lo:hi:points:lin|log");
  for (CLI::App* cmd : {cdf, psi}) cmd->add_option("--t", r.horizon, "horizon for the last passage");
  defect->add_option("--b-sweep", r.b_sweep, "lo:hi:points over the slope b");
  lt->add_option("--lambda-grid", r.lambda_grid, "lo:hi:points:lin|log");
  mc->add_option("--paths", r.paths, "number of paths");
  mc->add_option("--dt", r.dt, "time step");
  mc->add_option("--t-max", r.t_max, "horizon; later hits are censored");
  mc->add_option("--workers", r.workers, "threads (results do not depend on it)");
  mc->add_flag("--bridge", r.bridge, "Brownian-bridge crossing correction");
  mc->add_flag("--euler", r.euler, "Euler scheme on the SDE for cir / wf");
  mc->add_flag("--samples", r.samples, "print raw samples, one per line");
  verify->add_option("--workers", r.workers, "threads for the simulation criteria");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParameter;
  }

  try {
    if (verify->parsed()) {
      AcceptanceOptions opts;
      opts.workers = r.workers;
      const auto results = run_acceptance(opts);
      print_acceptance(out, results);
      return all_passed(results) ? kExitOk : kExitVerifyFailed;
    }
    const std::uint64_t seed = effective_seed(r, seed_env);
    const ModelSpec m = build_model(r);
    if (mc->parsed()) return run_mc(r, m, seed, out, err);
    Table t;
    if (density->parsed()) t = density_table(r, m);
    else if (cdf->parsed()) t = cdf_table(r, m);
    else if (defect->parsed()) t = defect_table(r, m);
    else if (mean->parsed()) t = mean_table(r, m, err);
    else if (lt->parsed()) t = laplace_table(r, m);
    else t = psi_table(r, m);
    emit(r, t, seed, out);
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const InsufficientSamplesError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace passage
