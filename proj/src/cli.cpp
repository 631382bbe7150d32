#include "gscan/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "gscan/constant_store.hpp"
#include "gscan/error.hpp"
#include "gscan/experiments.hpp"
#include "gscan/scan.hpp"
#include "gscan/stats.hpp"
#include "gscan/theory.hpp"
#include "json.hpp"

namespace gscan::cli {

namespace {

using nlohmann::json;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Option values echoed into every report; replaying them reproduces the run.
class Echo {
 public:
  template <class T>
  CLI::Option* option(CLI::App* app, const std::string& name, T& var, const std::string& desc) {
    entries_.emplace_back(name, [&var] { return json(var); });
    return app->add_option("--" + name, var, desc)->capture_default_str();
  }
  CLI::Option* flag(CLI::App* app, const std::string& name, bool& var, const std::string& desc) {
    entries_.emplace_back(name, [&var] { return json(var); });
    return app->add_flag("--" + name, var, desc);
  }
  json values() const {
    json j = json::object();
    for (const auto& [k, f] : entries_) {
      json v = f();
      if (v.is_number_float() && std::isnan(v.get<double>())) v = nullptr;
      j[k] = v;
    }
    return j;
  }

 private:
  std::vector<std::pair<std::string, std::function<json()>>> entries_;
};

struct Common {
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out;
  std::string format = "json";
  std::string cache_dir = ".gscan-cache";
};

struct SettingOpts {
  std::string setting = "discrete-cube";
  int d = 1;
  double n = 1024.0;
  double a = 1.0;
};

struct McOpts {
  std::uint64_t replications = 10000;
  std::uint64_t seed = 1;
  double half_width = 64.0;
};

struct Options {
  Common common;
  SettingOpts setting;
  McOpts mc;
  // constants
  std::string name;
  double kappa = kUnset;
  double h = kUnset;
  double tol = 1e-12;
  // threshold / poisson
  double tau = 0.0;
  // scan
  std::string family = "cube";
  std::int64_t side_min = 1;
  std::int64_t side_max = 0;
  std::uint64_t stream = 0;
  // experiments
  std::uint64_t replications = 100;
  double grid_step = 0.1;
  double side_lo = kUnset;
  double side_hi = kUnset;
  bool emit_samples = false;
  double range_a = 0.5;
  double range_b = 3.0;
  bool sanity = false;
  double u = 4.0;
  double q = 0.01;
  double x_lo = 0.0, x_hi = 1.0, h_lo = 1.0, h_hi = 2.0;
};

void log_phase(std::ostream& err, const std::string& msg) { err << "[gscan] " << msg << '\n'; }

ConstantStore make_store(const Options& o) {
  McParams mc;
  mc.replications = o.mc.replications;
  mc.seed = o.mc.seed;
  mc.half_width = o.mc.half_width;
  mc.workers = o.common.workers;
  std::optional<std::filesystem::path> dir;
  if (!o.common.cache_dir.empty()) dir = o.common.cache_dir;
  return ConstantStore(dir, mc);
}

SettingSpec make_setting(const Options& o) {
  SettingSpec s;
  s.family = parse_setting_family(o.setting.setting);
  s.d = o.setting.d;
  s.n = o.setting.n;
  s.a = o.setting.a;
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string csv_value(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return fmt17(v.get<double>());
  if (v.is_string()) return csv_field(v.get<std::string>());
  return csv_field(v.dump());
}

// Rows of flat objects sharing the keys of the first row.
std::string to_csv(const json& rows) {
  std::ostringstream os;
  if (rows.empty()) return "";
  std::vector<std::string> keys;
  for (auto it = rows.front().begin(); it != rows.front().end(); ++it) keys.push_back(it.key());
  for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i)
      os << (i ? "," : "") << csv_value(r.contains(keys[i]) ? r[keys[i]] : json(nullptr));
    os << '\n';
  }
  return os.str();
}

json constant_row(const std::string& name, int d, const ConstantEstimate& c) {
  return {{"name", name},
          {"d", d},
          {"value", c.value},
          {"abs_error", c.abs_error},
          {"method", to_string(c.method)},
          {"params", c.params}};
}

double require(double v, const std::string& flag) {
  if (std::isnan(v)) throw ConfigurationError("--" + flag + " is required");
  return v;
}

struct Output {
  json document;
  json rows;  // CSV body
};

Output cmd_constants(const Options& o, std::ostream& err) {
  auto store = make_store(o);
  const int d = o.setting.d;
  json rows = json::array();
  const auto& n = o.name;
  if (n.empty()) {
    log_phase(err, "resolving G_d, J_d, E_d for d = " + std::to_string(d));
    rows.push_back(constant_row("G_d", d, store.G_d(d)));
    const auto J = store.J_d(d);
    rows.push_back(constant_row("J_d", d, J));
    rows.push_back(constant_row("E_d", d, store.E_d(d)));
    if (d == 1) {
      ConstantEstimate H = J;
      H.value *= 4.0;
      H.abs_error *= 4.0;
      rows.push_back(constant_row("H", 1, H));
    }
  } else if (n == "F") {
    rows.push_back(constant_row("F", d, pickands_F(require(o.kappa, "kappa"), o.tol)));
  } else if (n == "G") {
    ConstantEstimate g;
    g.value = G_of(require(o.h, "length"), require(o.kappa, "kappa"));
    g.method = EstimateMethod::Series;
    g.params = {{"h", o.h}, {"kappa", o.kappa}};
    rows.push_back(constant_row("G", d, g));
  } else if (n == "G_d") {
    rows.push_back(constant_row("G_d", d, store.G_d(d)));
  } else if (n == "J_d") {
    rows.push_back(constant_row("J_d", d, store.J_d(d)));
  } else if (n == "E_d") {
    rows.push_back(constant_row("E_d", d, store.E_d(d)));
  } else if (n == "E_d_kappa") {
    rows.push_back(constant_row("E_d_kappa", d, estimate_E_d_node(d, require(o.kappa, "kappa"), store.mc())));
  } else if (n == "J_d_h") {
    rows.push_back(constant_row("J_d_h", d, J_d_of(require(o.h, "length"), d, store.mc())));
  } else if (n == "H") {
    auto J = store.J_d(1);
    J.value *= 4.0;
    J.abs_error *= 4.0;
    rows.push_back(constant_row("H", 1, J));
  } else {
    throw ConfigurationError("unknown constant '" + n + "'");
  }
  Output out;
  out.rows = rows;
  if (rows.size() == 1) {
    out.document = rows.front();
  } else {
    out.document = {{"rows", rows}};
  }
  return out;
}

Output cmd_threshold(const Options& o, std::ostream& err) {
  auto s = make_setting(o);
  auto store = make_store(o);
  log_phase(err, "resolving constants for " + to_string(s.family));
  store.resolve(s);
  const double u = normalizer(s, o.tau);
  json row = {{"setting", to_string(s.family)},
              {"d", s.d},
              {"n", s.n},
              {"tau", o.tau},
              {"u", u},
              {"band", normalizer_band(s)},
              {"tau_band", tau_band(s)},
              {"shift", normalizer_shift(s)}};
  Output out;
  out.rows = json::array({row});
  out.document = row;
  out.document["constants_used"] = store.used_json();
  return out;
}

Output cmd_rates(const Options& o, std::ostream& err) {
  auto store = make_store(o);
  json rows = json::array();
  log_phase(err, "resolving constants for d = " + std::to_string(o.setting.d));
  for (auto f : {SettingFamily::DiscreteCube, SettingFamily::DiscreteRect, SettingFamily::ContinuousCube,
                 SettingFamily::ContinuousRect}) {
    SettingSpec s = make_setting(o);
    s.family = f;
    store.resolve(s);
    const auto r = extreme_value_rate(s);
    json row = {{"setting", to_string(f)},
                {"d", s.d},
                {"alpha", r.alpha},
                {"beta", r.beta},
                {"gamma", r.gamma},
                {"constant", s.constant ? json(s.constant->value) : json(nullptr)},
                {"constant_error", s.constant ? json(s.constant->abs_error) : json(nullptr)},
                {"u", normalizer(s, o.tau)},
                {"u_rate", u_from_rate(r, s.n, o.tau)},
                {"band", normalizer_band(s)}};
    rows.push_back(row);
  }
  Output out;
  out.rows = rows;
  out.document = {{"rows", rows}, {"constants_used", store.used_json()}};
  return out;
}

Output cmd_scan(const Options& o, std::ostream& err) {
  const auto d = static_cast<std::size_t>(o.setting.d);
  const double nr = std::round(o.setting.n);
  if (d < 1) throw InvalidDimension("dimension must be at least 1");
  if (nr < 1.0 || nr != o.setting.n) throw ConfigurationError("--n must be a positive integer");
  const Extents dims(d, static_cast<Index>(nr));
  const Index smax = o.side_max > 0 ? o.side_max : kLatticeExtent;
  WindowFamily fam;
  if (o.family == "cube") {
    fam = WindowFamily::cubes(d, o.side_min, smax);
  } else if (o.family == "rect") {
    fam = WindowFamily::rects(Extents(d, o.side_min), Extents(d, smax));
  } else {
    throw InvalidFamily("--family must be cube or rect");
  }
  log_phase(err, "scanning");
  const auto field = generate_lattice(dims, o.common.seed, o.stream);
  const auto r = scan_family(build_prefix_table(field), fam);
  json row = {{"max_value", r.max_value},
              {"windows_scanned", r.windows_scanned},
              {"origin", r.argmax.origin},
              {"sides", r.argmax.sides}};
  Output out;
  out.rows = json::array({row});
  out.document = row;
  return out;
}

ExperimentConfig experiment_config(const Options& o, SettingSpec s) {
  ExperimentConfig cfg;
  cfg.setting = std::move(s);
  cfg.replications = o.replications;
  cfg.master_seed = o.common.seed;
  cfg.workers = o.common.workers;
  cfg.grid_step = o.grid_step;
  if (!std::isnan(o.side_lo)) cfg.side_lo = o.side_lo;
  if (!std::isnan(o.side_hi)) cfg.side_hi = o.side_hi;
  cfg.emit_samples = o.emit_samples;
  return cfg;
}

json experiment_doc(const ExperimentConfig& cfg, const ConstantStore& store, json summary) {
  return {{"experiment", to_json(cfg)},
          {"constants_used", store.used_json()},
          {"summary", std::move(summary)},
          {"seed", cfg.master_seed}};
}

Output cmd_gumbel(const Options& o, std::ostream& err) {
  auto s = make_setting(o);
  auto store = make_store(o);
  log_phase(err, "resolving constants");
  store.resolve(s);
  const auto cfg = experiment_config(o, s);
  log_phase(err, "running " + std::to_string(cfg.replications) + " replications");
  const auto r = run_gumbel(cfg);
  Output out;
  out.document = experiment_doc(cfg, store, to_json(r, false));
  if (cfg.emit_samples) out.document["samples"] = {{"tau", r.tau_samples}, {"max", r.maxima}};
  out.rows = json::array();
  for (std::size_t i = 0; i < r.tau_samples.size(); ++i)
    out.rows.push_back({{"replication", i}, {"max", r.maxima[i]}, {"tau", r.tau_samples[i]}});
  return out;
}

Output cmd_poisson(const Options& o, std::ostream& err) {
  auto s = make_setting(o);
  auto store = make_store(o);
  log_phase(err, "resolving constants");
  store.resolve(s);
  const auto cfg = experiment_config(o, s);
  json summary;
  if (o.sanity) {
    log_phase(err, "independent-events check");
    const auto sane = run_independent_events(2000, 3.0, 2000, cfg.master_seed, cfg.workers);
    summary["independent_events"] = to_json(sane, false);
    if (!sane.mean_ok || !sane.dispersion_ok)
      throw RuntimeFailure("Poisson checker failed on independent events");
  }
  log_phase(err, "counting clumps over " + std::to_string(cfg.replications) + " replications");
  const auto r = run_poisson_clumps(cfg, o.tau, o.range_a, o.range_b);
  summary["clumps"] = to_json(r, false);
  summary["tau"] = o.tau;
  summary["a"] = o.range_a;
  summary["b"] = o.range_b;
  Output out;
  out.document = experiment_doc(cfg, store, summary);
  if (cfg.emit_samples) out.document["samples"] = {{"counts", r.counts}};
  out.rows = json::array();
  for (std::size_t i = 0; i < r.counts.size(); ++i) out.rows.push_back({{"replication", i}, {"count", r.counts[i]}});
  return out;
}

Output cmd_lln(const Options& o, std::ostream& err) {
  auto s = make_setting(o);
  auto store = make_store(o);
  store.resolve(s);
  const auto cfg = experiment_config(o, s);
  log_phase(err, "running " + std::to_string(cfg.replications) + " replications");
  const auto ratios = run_lln(cfg);
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  json summary = {{"median", quantile_sorted(sorted, 0.5)},
                  {"min", sorted.front()},
                  {"max", sorted.back()},
                  {"mean", summarize(ratios).mean}};
  Output out;
  out.document = experiment_doc(cfg, store, summary);
  if (cfg.emit_samples) out.document["samples"] = {{"ratio", ratios}};
  out.rows = json::array();
  for (std::size_t i = 0; i < ratios.size(); ++i) out.rows.push_back({{"replication", i}, {"ratio", ratios[i]}});
  return out;
}

Output cmd_tail(const Options& o, std::ostream& err) {
  auto s = make_setting(o);
  auto store = make_store(o);
  const auto cfg = experiment_config(o, s);
  const auto dd = static_cast<std::size_t>(std::max(1, s.d));
  TailRegion region;
  region.origin.assign(dd, {o.x_lo, o.x_hi});
  region.length.assign(s.family == SettingFamily::ContinuousCube ? 1 : dd, {o.h_lo, o.h_hi});
  WalkNode node;
  if (s.family == SettingFamily::ContinuousCube && s.d > 1) {
    const auto mc = store.mc();
    const int d = s.d;
    node = [mc, d](double k) { return estimate_E_d_node(d, k, mc); };
  }
  log_phase(err, "running " + std::to_string(cfg.replications) + " replications");
  const auto r = run_tail_comparison(cfg, region, o.u, o.q, node);
  json summary = to_json(r);
  summary["u"] = o.u;
  summary["q"] = o.q;
  summary["region"] = {{"x", {o.x_lo, o.x_hi}}, {"h", {o.h_lo, o.h_hi}}};
  Output out;
  out.document = experiment_doc(cfg, store, summary);
  out.rows = json::array({to_json(r)});
  return out;
}

void add_setting(Echo& e, CLI::App* app, Options& o) {
  e.option(app, "setting", o.setting.setting,
           "iid | discrete-cube | discrete-rect | continuous-cube | continuous-rect");
  e.option(app, "d", o.setting.d, "dimension");
  e.option(app, "n", o.setting.n, "lattice extent or box side");
  e.option(app, "a", o.setting.a, "minimum side length (continuous settings)");
}

void add_mc(Echo& e, CLI::App* app, Options& o) {
  e.option(app, "mc-replications", o.mc.replications, "replications per Monte Carlo constant node");
  e.option(app, "constant-seed", o.mc.seed, "seed for Monte Carlo constants");
  e.option(app, "half-width", o.mc.half_width, "random-walk truncation half-width");
}

void add_experiment(Echo& e, CLI::App* app, Options& o, std::uint64_t reps) {
  o.replications = reps;
  e.option(app, "replications", o.replications, "replications");
  e.option(app, "grid-step", o.grid_step, "lattice spacing for continuous settings");
  e.option(app, "side-lo", o.side_lo, "smallest side length h");
  e.option(app, "side-hi", o.side_hi, "largest side length h");
  e.flag(app, "emit-samples", o.emit_samples, "include per-replication samples");
}

json load_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigurationError("bad config file " + path + ": " + e.what());
  }
  if (j.contains("config")) j = j["config"];
  if (!j.contains("command") || !j.contains("options"))
    throw ConfigurationError("config file lacks command/options");
  return j;
}

// argv for a replayed run: command, its echoed options, then the caller's
// own arguments (which win).
std::vector<std::string> replay_args(const json& cfg, const std::vector<std::string>& rest) {
  std::vector<std::string> args{cfg["command"].get<std::string>()};
  std::set<std::string> overridden;
  for (const auto& a : rest) {
    if (a.rfind("--", 0) != 0) continue;
    overridden.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  for (auto it = cfg["options"].begin(); it != cfg["options"].end(); ++it) {
    const auto& v = it.value();
    if (v.is_null() || overridden.count(it.key())) continue;
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back("--" + it.key());
      continue;
    }
    args.push_back("--" + it.key());
    if (v.is_number_float()) {
      args.push_back(fmt17(v.get<double>()));
    } else if (v.is_string()) {
      args.push_back(v.get<std::string>());
    } else {
      args.push_back(v.dump());
    }
  }
  args.insert(args.end(), rest.begin(), rest.end());
  return args;
}

int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err, bool replayed) {
  // Replay: --config FILE anywhere in argv.
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      continue;
    }
    if (replayed) {
      err << "error: nested --config\n";
      return 1;
    }
    try {
      const json cfg = load_replay(path);
      std::vector<std::string> rest;
      for (std::size_t k = 0; k < args.size(); ++k) {
        if (k == i || (k == i + 1 && args[i] == "--config")) continue;
        if (rest.empty() && args[k] == cfg["command"].get<std::string>()) continue;
        rest.push_back(args[k]);
      }
      return dispatch(replay_args(cfg, rest), out, err, true);
    } catch (const ConfigurationError& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }

  std::map<std::string, Options> opts;
  unsigned env_workers = 0;
  std::string env_cache = Common{}.cache_dir;
  if (const char* w = std::getenv("GSCAN_WORKERS")) env_workers = static_cast<unsigned>(std::strtoul(w, nullptr, 10));
  if (const char* c = std::getenv("GSCAN_CACHE_DIR")) env_cache = c;
  std::string config_path;

  CLI::App app{"Standardized Gaussian scan statistics: constants, thresholds and limit experiments", "gscan"};
  app.require_subcommand(0, 1);
  app.add_option("--config", config_path, "replay the config echoed in a previous report");

  std::map<std::string, Echo> echo;
  std::map<std::string, std::function<Output(const Options&, std::ostream&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& desc, auto handler) {
    CLI::App* s = app.add_subcommand(name, desc);
    auto& e = echo[name];
    Options& o = opts[name];
    o.common.workers = env_workers;
    o.common.cache_dir = env_cache;
    s->add_option("--out", o.common.out, "write the report here instead of standard output");
    s->add_option("--workers", o.common.workers, "worker threads (0 = all cores; env GSCAN_WORKERS)")
        ->capture_default_str();
    s->add_option("--cache-dir", o.common.cache_dir, "constant cache directory, empty to disable (env GSCAN_CACHE_DIR)")
        ->capture_default_str();
    e.option(s, "seed", o.common.seed, "master seed");
    e.option(s, "format", o.common.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    handlers[name] = handler;
    return std::tuple<CLI::App*, Echo*, Options*>{s, &e, &o};
  };

  {
    auto [s, e, op] = sub("constants", "evaluate F, G, G_d, J_d, E_d (table when --name is omitted)", cmd_constants);
    Options& o = *op;
    e->option(s, "name", o.name, "F | G | G_d | J_d | E_d | E_d_kappa | J_d_h | H");
    e->option(s, "d", o.setting.d, "dimension");
    e->option(s, "kappa", o.kappa, "grid parameter");
    e->option(s, "length", o.h, "side length h");
    e->option(s, "tol", o.tol, "series tolerance for F");
    add_mc(*e, s, o);
  }
  {
    auto [s, e, op] = sub("threshold", "normalizing threshold u_n(tau) with its uncertainty band", cmd_threshold);
    Options& o = *op;
    add_setting(*e, s, o);
    e->option(s, "tau", o.tau, "Gumbel location");
    add_mc(*e, s, o);
  }
  {
    auto [s, e, op] = sub("rates", "extreme-value rates of the four scan settings", cmd_rates);
    Options& o = *op;
    add_setting(*e, s, o);
    e->option(s, "tau", o.tau, "Gumbel location for the threshold columns");
    add_mc(*e, s, o);
  }
  {
    auto [s, e, op] = sub("scan", "maximum standardized sum over cubes or rectangles of one lattice", cmd_scan);
    Options& o = *op;
    e->option(s, "d", o.setting.d, "dimension");
    e->option(s, "n", o.setting.n, "lattice extent per axis");
    e->option(s, "family", o.family, "cube | rect");
    e->option(s, "side-min", o.side_min, "smallest side in cells");
    e->option(s, "side-max", o.side_max, "largest side in cells (0 = lattice extent)");
    e->option(s, "stream", o.stream, "RNG stream");
  }
  {
    auto [s, e, op] = sub("gumbel", "Gumbel convergence of the normalized maximum", cmd_gumbel);
    Options& o = *op;
    add_setting(*e, s, o);
    add_experiment(*e, s, o, 100);
    add_mc(*e, s, o);
  }
  {
    auto [s, e, op] = sub("poisson", "Poisson law of block exceedance counts", cmd_poisson);
    Options& o = *op;
    add_setting(*e, s, o);
    add_experiment(*e, s, o, 200);
    e->option(s, "tau", o.tau, "Gumbel location of the threshold");
    e->option(s, "range-a", o.range_a, "lower side multiplier");
    e->option(s, "range-b", o.range_b, "upper side multiplier");
    e->flag(s, "sanity", o.sanity, "check the counter on independent events first");
    add_mc(*e, s, o);
  }
  {
    auto [s, e, op] = sub("lln", "max / sqrt(2 d log n) per replication", cmd_lln);
    Options& o = *op;
    add_setting(*e, s, o);
    add_experiment(*e, s, o, 100);
    add_mc(*e, s, o);
  }
  {
    auto [s, e, op] = sub("tail", "Monte Carlo tail probability against the grid asymptotic", cmd_tail);
    Options& o = *op;
    o.setting.setting = "continuous-rect";
    add_setting(*e, s, o);
    add_experiment(*e, s, o, 100000);
    e->option(s, "u", o.u, "level");
    e->option(s, "q", o.q, "grid step");
    e->option(s, "x-lo", o.x_lo, "origin interval, every axis");
    e->option(s, "x-hi", o.x_hi, "");
    e->option(s, "h-lo", o.h_lo, "side-length interval, every axis");
    e->option(s, "h-hi", o.h_hi, "");
    add_mc(*e, s, o);
  }

  if (args.empty()) {
    err << app.help();
    return 1;
  }
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  const auto subs = app.get_subcommands();
  if (subs.empty()) {
    err << app.help();
    return 1;
  }
  const std::string command = subs.front()->get_name();
  const Options& o = opts.at(command);
  try {
    const auto t0 = std::chrono::steady_clock::now();
    Output result = handlers.at(command)(o, err);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json doc = {{"command", command}, {"config", {{"command", command}, {"options", echo.at(command).values()}}}};
    doc.update(result.document);
    doc["runtime_seconds"] = seconds;

    std::string text;
    if (o.common.format == "csv") {
      text = to_csv(result.rows);
    } else {
      text = doc.dump(2) + "\n";
    }
    if (o.common.out.empty()) {
      out << text;
    } else {
      std::ofstream f(o.common.out);
      if (!f) throw ConfigurationError("cannot write " + o.common.out);
      f << text;
      if (o.common.format == "csv") {
        // Tabular CSV drops the config; keep it beside the data for replay.
        std::ofstream meta(o.common.out + ".json");
        meta << doc.dump(2) << '\n';
      }
    }
    return 0;
  } catch (const ConfigurationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const RuntimeFailure& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, out, err, false);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace gscan::cli
