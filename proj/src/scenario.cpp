#include "gbesq/scenario.hpp"

#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "gbesq/lap_inversion.hpp"
#include "gbesq/stats.hpp"
#include "gbesq/validation.hpp"

namespace gbesq {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      fail(where + ": unknown key '" + k + "'");
  }
}

template <class T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + ": '" + key + "' has the wrong type");
  }
}

template <class T>
T optional(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return required<T>(j, key, where);
}

double positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(what + " must be > 0");
  return v;
}

}  // namespace

void MarkovChainSpec::validate() const {
  const std::size_t k = generator.size();
  if (k == 0) throw std::invalid_argument("MarkovChainSpec: empty generator");
  for (const auto& row : generator) {
    if (row.size() != k) throw std::invalid_argument("MarkovChainSpec: generator must be square");
  }
  for (std::size_t i = 0; i < k; ++i) {
    double sum = 0.0, scale = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double g = generator[i][j];
      if (!std::isfinite(g)) throw std::invalid_argument("MarkovChainSpec: non-finite rate");
      if (i != j && g < 0.0) throw std::invalid_argument("MarkovChainSpec: negative off-diagonal rate");
      sum += g;
      scale += std::abs(g);
    }
    if (std::abs(sum) > 1e-12 * std::max(1.0, scale)) throw std::invalid_argument("MarkovChainSpec: rows must sum to 0");
  }
  if (initial_state < 1 || static_cast<std::size_t>(initial_state) > k)
    throw std::invalid_argument("MarkovChainSpec: initial state must be in 1..K");
  if (alpha.size() != k || sigma.size() != k) throw std::invalid_argument("MarkovChainSpec: need one (alpha, sigma) per state");
  for (std::size_t i = 0; i < k; ++i)
    if (!(alpha[i] >= 0.0) || !(sigma[i] > 0.0)) throw std::invalid_argument("MarkovChainSpec: need alpha >= 0, sigma > 0");
}

RegimePath simulate_regime_path(const MarkovChainSpec& chain, double horizon, RngStream& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_regime_path: horizon must be > 0");
  RegimePath path{{0.0}, {chain.initial_state - 1}, chain.alpha, chain.sigma};
  double t = 0.0;
  for (;;) {
    const auto s = static_cast<std::size_t>(path.states.back());
    const double rate = -chain.generator[s][s];
    if (!(rate > 0.0)) break;  // absorbing
    t += rng.exponential() / rate;
    if (t >= horizon) break;
    double u = rng.uniform() * rate, acc = 0.0;
    std::size_t next = s;
    for (std::size_t j = 0; j < chain.size(); ++j) {
      if (j == s || chain.generator[s][j] <= 0.0) continue;
      next = j;
      acc += chain.generator[s][j];
      if (u < acc) break;
    }
    path.times.push_back(t);
    path.states.push_back(static_cast<int>(next));
  }
  path.times.push_back(horizon);
  return path;
}

json to_json(const PiecewiseFn& f) {
  return {{"mode", f.mode() == PiecewiseFn::Mode::Step ? "step" : "linear"},
          {"breakpoints", f.breakpoints()},
          {"values", f.values()}};
}

PiecewiseFn piecewise_from_json(const json& j) {
  if (j.is_object() && j.contains("constant")) {
    only_keys(j, "function", {"constant", "horizon"});
    return PiecewiseFn::constant(required<double>(j, "constant", "function"), required<double>(j, "horizon", "function"));
  }
  only_keys(j, "function", {"mode", "breakpoints", "values"});
  const auto mode = optional<std::string>(j, "mode", "step", "function");
  auto b = required<std::vector<double>>(j, "breakpoints", "function");
  auto v = required<std::vector<double>>(j, "values", "function");
  try {
    if (mode == "step") return PiecewiseFn::step(std::move(b), std::move(v));
    if (mode == "linear") return PiecewiseFn::linear(std::move(b), std::move(v));
  } catch (const std::invalid_argument& e) {
    fail(std::string("function: ") + e.what());
  }
  fail("function: mode must be 'step' or 'linear'");
}

json to_json(const RadonMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({a.location, a.weight});
  return {{"horizon", mu.horizon()}, {"atoms", atoms}, {"density", to_json(mu.density())}};
}

RadonMeasure measure_from_json(const json& j) {
  if (j.is_object() && j.contains("lebesgue")) {
    only_keys(j, "measure", {"lebesgue", "horizon"});
    return RadonMeasure::lebesgue(positive(required<double>(j, "horizon", "measure"), "measure horizon"),
                                  required<double>(j, "lebesgue", "measure"));
  }
  only_keys(j, "measure", {"horizon", "atoms", "density"});
  const double horizon = positive(required<double>(j, "horizon", "measure"), "measure horizon");
  std::vector<RadonMeasure::Atom> atoms;
  for (const auto& a : optional<std::vector<std::array<double, 2>>>(j, "atoms", {}, "measure"))
    atoms.push_back({a[0], a[1]});
  const PiecewiseFn density =
      j.contains("density") ? piecewise_from_json(j.at("density")) : PiecewiseFn::constant(0.0, horizon);
  try {
    return RadonMeasure(std::move(atoms), density, horizon);
  } catch (const std::exception& e) {
    fail(std::string("measure: ") + e.what());
  }
}

json to_json(const GbesqSpec& spec) {
  return {{"delta", to_json(spec.delta)}, {"beta", spec.beta ? to_json(*spec.beta) : json(nullptr)}, {"x0", spec.x0}};
}

GbesqSpec spec_from_json(const json& j) {
  only_keys(j, "spec", {"kind", "delta", "beta", "x0"});
  const auto delta = piecewise_from_json(required<json>(j, "delta", "spec"));
  const double x0 = optional<double>(j, "x0", 0.0, "spec");
  try {
    if (j.contains("beta") && !j.at("beta").is_null()) return make_spec(delta, piecewise_from_json(j.at("beta")), x0);
    return make_spec(delta, x0);
  } catch (const std::invalid_argument& e) {
    fail(std::string("spec: ") + e.what());
  }
}

namespace {

json to_json(const RegimePath& p) {
  std::vector<int> states;
  for (int s : p.states) states.push_back(s + 1);
  return {{"times", p.times}, {"states", states}, {"alpha", p.alpha}, {"sigma", p.sigma}};
}

json to_json(const MarkovChainSpec& c) {
  return {{"generator", c.generator}, {"initial_state", c.initial_state}, {"alpha", c.alpha}, {"sigma", c.sigma}};
}

ModelConfig parse_model(const json& j, json& echo) {
  ModelConfig m;
  m.kind = required<std::string>(j, "kind", "model");
  const std::string w = "model (" + m.kind + ")";
  try {
    if (m.kind == "gbesq") {
      m.gbesq = spec_from_json(j);
      echo = to_json(m.gbesq);
    } else if (m.kind == "ou") {
      only_keys(j, w, {"kind", "mu", "sigma", "x0"});
      m.mu = required<double>(j, "mu", w), m.sigma = required<double>(j, "sigma", w), m.x0 = required<double>(j, "x0", w);
      adapt_ou(m.mu, m.sigma, m.x0, 1.0);
      echo = {{"mu", m.mu}, {"sigma", m.sigma}, {"x0", m.x0}};
    } else if (m.kind == "cir") {
      only_keys(j, w, {"kind", "alpha", "beta", "sigma", "x0"});
      m.alpha = required<double>(j, "alpha", w), m.beta = required<double>(j, "beta", w);
      m.sigma = required<double>(j, "sigma", w), m.x0 = required<double>(j, "x0", w);
      adapt_cir(m.alpha, m.beta, m.sigma, m.x0, 1.0);
      echo = {{"alpha", m.alpha}, {"beta", m.beta}, {"sigma", m.sigma}, {"x0", m.x0}};
    } else if (m.kind == "cev") {
      only_keys(j, w, {"kind", "mu", "sigma", "rho", "x0"});
      m.mu = required<double>(j, "mu", w), m.sigma = required<double>(j, "sigma", w);
      m.rho = required<double>(j, "rho", w), m.x0 = required<double>(j, "x0", w);
      adapt_cev(m.mu, m.sigma, m.rho, m.x0, 1.0);
      echo = {{"mu", m.mu}, {"sigma", m.sigma}, {"rho", m.rho}, {"x0", m.x0}};
    } else if (m.kind == "extended_cir") {
      only_keys(j, w, {"kind", "r0", "regimes", "chain"});
      m.r0 = required<double>(j, "r0", w);
      if (!(m.r0 >= 0.0)) fail(w + ": r0 must be >= 0");
      if (j.contains("regimes") == j.contains("chain")) fail(w + ": give exactly one of 'regimes' and 'chain'");
      if (j.contains("regimes")) {
        const auto& r = j.at("regimes");
        only_keys(r, "regimes", {"times", "states", "alpha", "sigma"});
        RegimePath p{required<std::vector<double>>(r, "times", "regimes"), required<std::vector<int>>(r, "states", "regimes"),
                     required<std::vector<double>>(r, "alpha", "regimes"), required<std::vector<double>>(r, "sigma", "regimes")};
        for (int& s : p.states) --s;  // 1-based in the file
        p.validate();
        m.regimes = p;
        echo = {{"r0", m.r0}, {"regimes", to_json(p)}};
      } else {
        const auto& c = j.at("chain");
        only_keys(c, "chain", {"generator", "initial_state", "alpha", "sigma"});
        MarkovChainSpec chain{required<std::vector<std::vector<double>>>(c, "generator", "chain"),
                              optional<int>(c, "initial_state", 1, "chain"), required<std::vector<double>>(c, "alpha", "chain"),
                              required<std::vector<double>>(c, "sigma", "chain")};
        chain.validate();
        m.chain = chain;
        echo = {{"r0", m.r0}, {"chain", to_json(chain)}};
      }
    } else if (m.kind == "sv") {
      only_keys(j, w, {"kind", "drift", "rho", "s0", "variance"});
      m.drift = piecewise_from_json(required<json>(j, "drift", w));
      m.rho = required<double>(j, "rho", w);
      m.s0 = optional<double>(j, "s0", 1.0, w);
      m.gbesq = spec_from_json(required<json>(j, "variance", w));
      SvModel{m.drift, m.rho, m.gbesq, m.s0}.validate();
      echo = {{"drift", to_json(m.drift)}, {"rho", m.rho}, {"s0", m.s0}, {"variance", to_json(m.gbesq)}};
    } else {
      fail("model: unknown kind '" + m.kind + "'");
    }
  } catch (const std::invalid_argument& e) {
    fail(w + ": " + e.what());
  }
  echo["kind"] = m.kind;
  return m;
}

void require_kind(const ModelConfig& m, const std::string& task, std::initializer_list<const char*> kinds) {
  if (std::none_of(kinds.begin(), kinds.end(), [&](const char* k) { return m.kind == k; }))
    fail("task " + task + " does not support model kind '" + m.kind + "'");
}

json parse_params(const std::string& task, const json& j, const ScenarioConfig& cfg) {
  const std::string w = "params (" + task + ")";
  const auto& m = cfg.model;
  const auto n_default = static_cast<std::uint64_t>(cfg.numeric.n_paths);
  json p;
  if (task == "laplace") {
    require_kind(m, task, {"gbesq", "cir", "extended_cir"});
    only_keys(j, w, {"t", "lambda", "measure"});
    p["t"] = positive(required<double>(j, "t", w), "t");
    const auto lambda = required<std::vector<double>>(j, "lambda", w);
    if (lambda.empty()) fail(w + ": empty lambda grid");
    for (double l : lambda)
      if (!(l >= 0.0)) fail(w + ": lambda must be >= 0");
    p["lambda"] = lambda;
    p["measure"] = nullptr;
    if (j.contains("measure") && !j.at("measure").is_null()) {
      if (m.kind != "gbesq") fail(w + ": 'measure' needs a gbesq model");
      p["measure"] = to_json(measure_from_json(j.at("measure")));
    }
    if (m.kind == "extended_cir" && !m.regimes) fail(w + ": laplace needs a fixed regime path");
    if (m.regimes && m.regimes->horizon() < p["t"].get<double>()) fail(w + ": regime path ends before t");
  } else if (task == "sample-endpoint") {
    require_kind(m, task, {"gbesq", "ou", "cir", "cev", "extended_cir"});
    only_keys(j, w, {"t", "n"});
    p["t"] = positive(required<double>(j, "t", w), "t");
    p["n"] = optional<std::uint64_t>(j, "n", n_default, w);
    if (m.regimes && m.regimes->horizon() < p["t"].get<double>()) fail(w + ": regime path ends before t");
  } else if (task == "sample-bridge-integral") {
    require_kind(m, task, {"gbesq"});
    only_keys(j, w, {"x", "y", "t", "n", "measure"});
    const double t = positive(required<double>(j, "t", w), "t");
    p["t"] = t;
    p["x"] = optional<double>(j, "x", m.gbesq.x0, w);
    p["y"] = required<double>(j, "y", w);
    if (!(p["x"].get<double>() >= 0.0 && p["y"].get<double>() >= 0.0)) fail(w + ": endpoints must be >= 0");
    p["n"] = optional<std::uint64_t>(j, "n", n_default, w);
    p["measure"] = to_json(j.contains("measure") ? measure_from_json(j.at("measure")) : RadonMeasure::lebesgue(t));
  } else if (task == "price-bond") {
    require_kind(m, task, {"extended_cir"});
    only_keys(j, w, {"maturities", "route"});
    auto mats = required<std::vector<double>>(j, "maturities", w);
    if (mats.empty()) fail(w + ": empty maturities");
    for (std::size_t i = 0; i < mats.size(); ++i)
      if (!(mats[i] > 0.0) || (i > 0 && !(mats[i] > mats[i - 1]))) fail(w + ": maturities must be positive and increasing");
    if (m.regimes && m.regimes->horizon() < mats.back()) fail(w + ": regime path ends before the last maturity");
    p["maturities"] = mats;
    const auto route = optional<std::string>(j, "route", "both", w);
    if (route != "ode" && route != "monte-carlo" && route != "both") fail(w + ": route must be ode, monte-carlo or both");
    p["route"] = route;
  } else if (task == "sim-sv") {
    require_kind(m, task, {"sv"});
    only_keys(j, w, {"t", "steps", "n"});
    p["t"] = positive(required<double>(j, "t", w), "t");
    p["steps"] = optional<int>(j, "steps", 1, w);
    if (p["steps"].get<int>() < 1) fail(w + ": steps must be >= 1");
    p["n"] = optional<std::uint64_t>(j, "n", n_default, w);
  } else if (task == "sim-default") {
    require_kind(m, task, {"gbesq"});
    only_keys(j, w, {"grid", "h"});
    const auto grid = required<std::vector<double>>(j, "grid", w);
    if (grid.empty()) fail(w + ": empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (!(grid[i] > 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) fail(w + ": grid must be positive and increasing");
    p["grid"] = grid;
    p["h"] = positive(optional<double>(j, "h", 0.125, w), "h");
  } else if (task == "validate") {
    only_keys(j, w, {"criteria", "default_time_step"});
    const auto ids = optional<std::vector<int>>(j, "criteria", {}, w);
    for (int id : ids)
      if (id < 1 || id > kCriterionCount) fail(w + ": criteria must be in 1..10");
    p["criteria"] = ids;
    p["default_time_step"] = positive(optional<double>(j, "default_time_step", 0.125, w), "default_time_step");
  }
  if (m.kind == "gbesq" && m.gbesq.has_drift() && task != "laplace") fail("task " + task + " needs a driftless spec");
  return p;
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"laplace",  "sample-endpoint", "sample-bridge-integral", "price-bond",
                                              "sim-sv",   "sim-default",     "validate"};
  return names;
}

ScenarioConfig parse_config(const json& j) {
  only_keys(j, "config", {"schema_version", "task", "model", "params", "numeric", "output"});
  ScenarioConfig cfg;
  cfg.schema_version = required<int>(j, "schema_version", "config");
  if (cfg.schema_version != kSchemaVersion)
    fail("config: unsupported schema_version " + std::to_string(cfg.schema_version));
  cfg.task = required<std::string>(j, "task", "config");
  const auto& names = task_names();
  if (std::find(names.begin(), names.end(), cfg.task) == names.end()) fail("config: unknown task '" + cfg.task + "'");

  const json num = j.value("numeric", json::object());
  only_keys(num, "numeric", {"seed", "n_paths", "n_chain_paths", "threads", "quantile_tol", "mixture_tol", "n_max"});
  auto& n = cfg.numeric;
  n.seed = optional<std::uint64_t>(num, "seed", n.seed, "numeric");
  n.n_paths = optional<std::uint64_t>(num, "n_paths", n.n_paths, "numeric");
  n.n_chain_paths = optional<std::uint64_t>(num, "n_chain_paths", n.n_chain_paths, "numeric");
  n.threads = optional<int>(num, "threads", n.threads, "numeric");
  n.quantile_tol = positive(optional<double>(num, "quantile_tol", n.quantile_tol, "numeric"), "quantile_tol");
  n.mixture_tol = positive(optional<double>(num, "mixture_tol", n.mixture_tol, "numeric"), "mixture_tol");
  n.n_max = optional<int>(num, "n_max", n.n_max, "numeric");
  if (n.n_paths < 1 || n.n_chain_paths < 1 || n.n_max < 1 || n.threads < 0) fail("numeric: counts must be positive");

  const json out = j.value("output", json::object());
  only_keys(out, "output", {"csv", "precision"});
  cfg.output.csv = optional<std::string>(out, "csv", cfg.output.csv, "output");
  cfg.output.precision = optional<int>(out, "precision", cfg.output.precision, "output");
  if (cfg.output.csv.empty() || cfg.output.precision < 1 || cfg.output.precision > 17)
    fail("output: need a csv path and 1 <= precision <= 17");

  json model_echo = nullptr;
  if (cfg.task != "validate") {
    cfg.model = parse_model(required<json>(j, "model", "config"), model_echo);
  } else if (j.contains("model")) {
    fail("config: the validate task takes no model");
  }
  cfg.params = parse_params(cfg.task, j.value("params", json::object()), cfg);

  cfg.resolved = {{"schema_version", cfg.schema_version},
                  {"task", cfg.task},
                  {"model", model_echo},
                  {"params", cfg.params},
                  {"numeric",
                   {{"seed", n.seed},
                    {"n_paths", n.n_paths},
                    {"n_chain_paths", n.n_chain_paths},
                    {"threads", n.threads},
                    {"quantile_tol", n.quantile_tol},
                    {"mixture_tol", n.mixture_tol},
                    {"n_max", n.n_max}}},
                  {"output", {{"csv", cfg.output.csv}, {"precision", cfg.output.precision}}}};
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

SamplerOptions ScenarioConfig::sampler() const {
  return SamplerOptions{numeric.quantile_tol, numeric.mixture_tol, numeric.n_max};
}

MonteCarloConfig ScenarioConfig::monte_carlo() const {
  MonteCarloConfig mc;
  mc.n_paths = numeric.n_paths;
  mc.seed = numeric.seed;
  mc.threads = numeric.threads;
  mc.sampler = sampler();
  return mc;
}

std::string format_number(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

namespace {

ModelAdapter build_adapter(const ModelConfig& m, double horizon, const RegimePath* path = nullptr) {
  if (m.kind == "ou") return adapt_ou(m.mu, m.sigma, m.x0, horizon);
  if (m.kind == "cir") return adapt_cir(m.alpha, m.beta, m.sigma, m.x0, horizon);
  if (m.kind == "cev") return adapt_cev(m.mu, m.sigma, m.rho, m.x0, horizon);
  if (m.kind == "extended_cir") return adapt_extended_cir(path ? *path : *m.regimes, m.r0, horizon);
  return ModelAdapter{m.gbesq, TimeChange::identity(horizon), SpaceMap{}};
}

// exp(-int_0^{T_k} r) for every maturity from one exact path of the short rate
std::vector<double> discount_path(const ModelConfig& m, const RegimePath& path, const std::vector<double>& mats,
                                  RngStream& rng, const SamplerOptions& opt) {
  const auto model = adapt_extended_cir(path, m.r0, mats.back());
  const auto mu = model_time_lebesgue(model, mats.back());
  std::vector<double> times{0.0};
  for (double t : mats) times.push_back(model.time_change(t));
  times.back() = mu.horizon();
  const auto pts = sample_skeleton(model.gbesq, times, true, rng, mu, opt);
  std::vector<double> out;
  double acc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) out.push_back(std::exp(-(acc += *pts[i].integral)));
  return out;
}

std::vector<std::string> row(std::initializer_list<std::string> cells) { return cells; }

Table task_laplace(const ScenarioConfig& cfg) {
  const auto& m = cfg.model;
  const double t = cfg.params["t"];
  const auto lambda = cfg.params["lambda"].get<std::vector<double>>();
  const int prec = cfg.output.precision;
  Table tab{{"lambda", "F"}, {}};
  if (!cfg.params["measure"].is_null()) {
    const auto mu = measure_from_json(cfg.params["measure"]);
    for (double l : lambda)
      tab.rows.push_back(row({format_number(l, prec), format_number(functional_laplace(m.gbesq, mu.scaled(l)), prec)}));
    return tab;
  }
  const auto model = build_adapter(m, t);
  if (model.space_map.power != 1.0) fail("laplace needs a linear space map");
  const double s = model.time_change(t), scale = std::exp(model.space_map.rate * t);
  for (double l : lambda) {
    const double ls = l * scale;
    const double f = model.gbesq.has_drift() ? functional_laplace(model.gbesq, RadonMeasure::dirac(s, ls, s))
                                             : transition_laplace(model.gbesq, s, ls);
    tab.rows.push_back(row({format_number(l, prec), format_number(f, prec)}));
  }
  return tab;
}

Table samples_table(const std::vector<double>& xs, int prec) {
  Table tab{{"index", "value"}, {}};
  for (std::size_t i = 0; i < xs.size(); ++i) tab.rows.push_back(row({std::to_string(i), format_number(xs[i], prec)}));
  return tab;
}

Table task_sample_endpoint(const ScenarioConfig& cfg) {
  const double t = cfg.params["t"];
  const std::size_t n = cfg.params["n"];
  const auto opt = cfg.sampler();
  std::vector<double> xs(n);
  const auto& m = cfg.model;
  if (m.chain) {
    // quenched: one regime path per draw
    parallel_for(
        n,
        [&](std::size_t i) {
          RngStream rng(cfg.numeric.seed, i);
          const auto path = simulate_regime_path(*m.chain, t, rng);
          xs[i] = sample_model(adapt_extended_cir(path, m.r0, t), t, rng, opt);
        },
        cfg.numeric.threads);
  } else {
    const auto model = build_adapter(m, t);
    parallel_for(
        n,
        [&](std::size_t i) {
          RngStream rng(cfg.numeric.seed, i);
          xs[i] = sample_model(model, t, rng, opt);
        },
        cfg.numeric.threads);
  }
  return samples_table(xs, cfg.output.precision);
}

Table task_bridge_integral(const ScenarioConfig& cfg) {
  const double x = cfg.params["x"], y = cfg.params["y"], t = cfg.params["t"];
  const std::size_t n = cfg.params["n"];
  const auto mu = measure_from_json(cfg.params["measure"]);
  const auto opt = cfg.sampler();
  std::vector<double> xs(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        RngStream rng(cfg.numeric.seed, i);
        xs[i] = sample_bridge_integral(cfg.model.gbesq.delta, x, y, t, mu, rng, opt);
      },
      cfg.numeric.threads);
  return samples_table(xs, cfg.output.precision);
}

Table task_price_bond(const ScenarioConfig& cfg) {
  const auto& m = cfg.model;
  const auto mats = cfg.params["maturities"].get<std::vector<double>>();
  const std::string route = cfg.params["route"];
  const bool ode = route != "monte-carlo", mc = route != "ode";
  const int prec = cfg.output.precision;
  const auto opt = cfg.sampler();
  const std::size_t k = mats.size();
  const std::size_t n = m.chain ? cfg.numeric.n_chain_paths : cfg.numeric.n_paths;

  std::vector<std::vector<double>> ode_vals(n, std::vector<double>(k)), mc_vals(n, std::vector<double>(k));
  if (m.chain) {
    // outer loop over chain paths; one exact rate path per chain path
    parallel_for(
        n,
        [&](std::size_t i) {
          RngStream rng(cfg.numeric.seed, i);
          const auto path = simulate_regime_path(*m.chain, mats.back(), rng);
          if (ode)
            for (std::size_t j = 0; j < k; ++j) ode_vals[i][j] = price_bond(path, m.r0, mats[j], BondRoute::Ode).price;
          if (mc) mc_vals[i] = discount_path(m, path, mats, rng, opt);
        },
        cfg.numeric.threads);
  } else if (mc) {
    parallel_for(
        n,
        [&](std::size_t i) {
          RngStream rng(cfg.numeric.seed, i);
          mc_vals[i] = discount_path(m, *m.regimes, mats, rng, opt);
        },
        cfg.numeric.threads);
  }

  Table tab{{"t", "value", "stderr", "route"}, {}};
  for (std::size_t j = 0; j < k; ++j) {
    if (ode) {
      double v = 0.0, se = 0.0;
      if (m.chain) {
        MeanAccumulator a;
        for (std::size_t i = 0; i < n; ++i) a.add(ode_vals[i][j]);
        v = a.mean(), se = a.std_error();
      } else {
        v = price_bond(*m.regimes, m.r0, mats[j], BondRoute::Ode).price;
      }
      tab.rows.push_back(row({format_number(mats[j], prec), format_number(v, prec), format_number(se, prec), "ode"}));
    }
    if (mc) {
      MeanAccumulator a;
      for (std::size_t i = 0; i < n; ++i) a.add(mc_vals[i][j]);
      tab.rows.push_back(row({format_number(mats[j], prec), format_number(a.mean(), prec), format_number(a.std_error(), prec),
                              "monte-carlo"}));
    }
  }
  return tab;
}

Table task_sim_sv(const ScenarioConfig& cfg) {
  const auto& m = cfg.model;
  const SvModel model{m.drift, m.rho, m.gbesq, m.s0};
  const double t = cfg.params["t"];
  const int steps = cfg.params["steps"];
  const std::size_t n = cfg.params["n"];
  const auto opt = cfg.sampler();
  std::vector<SvState> out(n);
  parallel_for(
      n,
      [&](std::size_t p) {
        RngStream rng(cfg.numeric.seed, p);
        SvState st{model.s0, model.vol.x0, 0.0};
        double integral = 0.0;
        for (int k = 0; k < steps; ++k) {
          st = sv_exact_step(model, t * k / steps, t * (k + 1) / steps, st, rng, opt);
          integral += st.integral;
        }
        out[p] = {st.s, st.v, integral};
      },
      cfg.numeric.threads);
  const int prec = cfg.output.precision;
  Table tab{{"index", "s", "v", "integral"}, {}};
  for (std::size_t i = 0; i < n; ++i)
    tab.rows.push_back(
        row({std::to_string(i), format_number(out[i].s, prec), format_number(out[i].v, prec), format_number(out[i].integral, prec)}));
  return tab;
}

Table task_sim_default(const ScenarioConfig& cfg) {
  const auto grid = cfg.params["grid"].get<std::vector<double>>();
  const auto curve = default_curve(cfg.model.gbesq, grid, cfg.params["h"].get<double>(), cfg.monte_carlo());
  const int prec = cfg.output.precision;
  Table tab{{"t", "value", "stderr", "route"}, {}};
  for (const auto& p : curve) {
    tab.rows.push_back(row({format_number(p.t, prec), format_number(p.analytic, prec), "0", "analytic"}));
    tab.rows.push_back(
        row({format_number(p.t, prec), format_number(p.empirical, prec), format_number(p.std_error, prec), "monte-carlo"}));
  }
  return tab;
}

Table task_validate(const ScenarioConfig& cfg, std::ostream* log) {
  AcceptanceOptions opt;
  opt.only = cfg.params["criteria"].get<std::vector<int>>();
  opt.threads = cfg.numeric.threads;
  opt.default_time_step = cfg.params["default_time_step"];
  opt.log = log;
  Table tab{{"criterion", "name", "status", "seconds", "detail"}, {}};
  for (const auto& r : run_acceptance(opt))
    tab.rows.push_back(row({std::to_string(r.id), r.name, r.pass ? "PASS" : "FAIL", format_number(r.seconds, 6), r.detail}));
  return tab;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Table execute(const ScenarioConfig& cfg, std::ostream* log) {
  const auto& t = cfg.task;
  if (t == "laplace") return task_laplace(cfg);
  if (t == "sample-endpoint") return task_sample_endpoint(cfg);
  if (t == "sample-bridge-integral") return task_bridge_integral(cfg);
  if (t == "price-bond") return task_price_bond(cfg);
  if (t == "sim-sv") return task_sim_sv(cfg);
  if (t == "sim-default") return task_sim_default(cfg);
  if (t == "validate") return task_validate(cfg, log);
  fail("unknown task '" + t + "'");
}

int run(const ScenarioConfig& cfg, std::ostream& err, std::ostream* log) {
  const std::string started = utc_now();
  const auto start = std::chrono::steady_clock::now();
  Table tab;
  try {
    tab = execute(cfg, log);
  } catch (const ConfigError& e) {
    err << "gbesq: config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "gbesq: numeric failure: " << e.what() << '\n';
    return 3;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  int code = 0;
  if (cfg.task == "validate")
    for (const auto& r : tab.rows)
      if (r[2] != "PASS") code = 3;

  const std::filesystem::path csv(cfg.output.csv);
  const std::filesystem::path manifest = csv.string() + ".manifest.json";
  try {
    if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
    std::ofstream out(csv);
    for (std::size_t i = 0; i < tab.columns.size(); ++i) out << (i ? "," : "") << csv_cell(tab.columns[i]);
    out << '\n';
    for (const auto& r : tab.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_cell(r[i]);
      out << '\n';
    }
    if (!out) throw std::runtime_error("cannot write " + csv.string());

    const json m = {{"task", cfg.task},
                    {"config", cfg.resolved},
                    {"seed", cfg.numeric.seed},
                    {"threads", cfg.numeric.threads > 0 ? cfg.numeric.threads : default_threads()},
                    {"versions",
                     {{"gbesq", kVersion},
                      {"schema_version", kSchemaVersion},
                      {"compiler", __VERSION__},
                      {"boost", BOOST_LIB_VERSION},
                      {"cplusplus", __cplusplus}}},
                    {"started_utc", started},
                    {"wall_time_seconds", wall},
                    {"csv", csv.string()},
                    {"rows", tab.rows.size()},
                    {"exit_code", code}};
    std::ofstream mf(manifest);
    mf << m.dump(2) << '\n';
    if (!mf) throw std::runtime_error("cannot write " + manifest.string());
  } catch (const std::exception& e) {
    err << "gbesq: " << e.what() << '\n';
    return 3;
  }
  if (code) err << "gbesq: some acceptance criteria failed\n";
  return code;
}

}  // namespace gbesq
