#include "lanlab/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lanlab/errors.hpp"

namespace lanlab::harness {

using nlohmann::json;

namespace {

std::string type_name(const json& j) { return j.type_name(); }

/// Object view that remembers which keys were read so that leftovers can be
/// reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object, got " + type_name(j_));
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, at(key)) : fallback;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const json* v = find(key);
    return v ? as_count(*v, at(key)) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(at(key), "expected a boolean, got " + type_name(*v));
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(at(key), "expected a string, got " + type_name(*v));
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) fail(at(key), "expected an array, got " + type_name(*v));
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_number((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) fail(at(key), "expected an array, got " + type_name(*v));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      out.push_back(as_count((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<std::vector<double>> matrix(const std::string& key) {
    const json* v = find(key);
    if (!v) return {};
    if (!v->is_array()) fail(at(key), "expected an array of rows");
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& row = (*v)[i];
      const std::string p = at(key) + "[" + std::to_string(i) + "]";
      if (!row.is_array()) fail(p, "expected an array");
      std::vector<double> r;
      for (std::size_t k = 0; k < row.size(); ++k) r.push_back(as_number(row[k], p + "[" + std::to_string(k) + "]"));
      out.push_back(std::move(r));
    }
    return out;
  }

  /// Sub-object, or nullopt when absent.
  std::optional<Reader> child(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return Reader(*v, at(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number, got " + type_name(v));
    return v.get<double>();
  }

  static std::size_t as_count(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) fail(path, "must be non-negative");
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d == std::floor(d) && d < 9.007199254740992e15) return static_cast<std::size_t>(d);
    }
    fail(path, "expected a non-negative integer");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) Reader::fail(path, what);
}

std::uint64_t read_seed(const json* v) {
  if (!v) return 0;
  if (v->is_number_unsigned()) return v->get<std::uint64_t>();
  if (v->is_string()) {
    const std::string s = v->get<std::string>();
    std::size_t used = 0;
    try {
      const unsigned long long parsed = std::stoull(s, &used, 0);
      if (used == s.size() && !s.empty() && s[0] != '-') return parsed;
    } catch (const std::exception&) {
    }
  }
  Reader::fail("$.seed", "expected a 64-bit unsigned integer");
}

ParameterInterval read_interval(Reader& r, const std::string& key, ParameterInterval fallback) {
  if (!r.has(key)) {
    r.find(key);
    return fallback;
  }
  const auto v = r.numbers(key, {});
  require(v.size() == 2 && v[0] < v[1], r.at(key), "expected [lo, hi] with lo < hi");
  return {v[0], v[1]};
}

void read_noise(Reader r, NoiseConfig& out) {
  const std::string kind = r.string("kind", "tempered_stable");
  require(kind == "tempered_stable", r.at("kind"), "only 'tempered_stable' is supported");
  TemperedStable ts;
  ts.alpha = r.number("alpha", ts.alpha);
  const double lambda = r.number("lambda", 1.0);
  ts.lambda_plus = r.number("lambda_plus", lambda);
  ts.lambda_minus = r.number("lambda_minus", lambda);
  const double c = r.number("c", 1.0);
  ts.c_plus = r.number("c_plus", c);
  ts.c_minus = r.number("c_minus", c);
  require(ts.alpha > 0.0 && ts.alpha < 2.0, r.at("alpha"), "alpha must lie in (0, 2)");
  require(ts.lambda_plus >= 0.0 && ts.lambda_minus >= 0.0, r.at("lambda"), "lambda must be >= 0");
  require(ts.c_plus >= 0.0 && ts.c_minus >= 0.0, r.at("c"), "c must be >= 0");
  out.spec.kind = ts;
  out.spec.drift_c = r.number("drift", 0.0);
  out.spec.u0 = r.number("u0", 1.0);
  out.spec.beta = r.number("beta", 1.0);
  require(out.spec.u0 > 0.0, r.at("u0"), "u0 must be > 0");
  require(out.spec.beta > 0.0, r.at("beta"), "beta must be > 0");
  out.delta_given = r.has("delta_trunc");
  out.sampler.delta_trunc = r.number("delta_trunc", out.sampler.delta_trunc);
  out.truncation_tol = r.number("truncation_tol", out.truncation_tol);
  out.sampler.table_size = r.count("table_size", out.sampler.table_size);
  require(out.sampler.delta_trunc > 0.0 && out.sampler.delta_trunc < out.spec.u0, r.at("delta_trunc"),
          "delta_trunc must lie in (0, u0)");
  require(out.truncation_tol > 0.0, r.at("truncation_tol"), "truncation_tol must be > 0");
  require(out.sampler.table_size >= 16, r.at("table_size"), "table_size must be >= 16");
  r.finish();
}

void read_model(Reader r, ModelConfig& out) {
  const std::string type = r.string("type", "chain");
  if (type == "chain") {
    out.type = ModelType::Chain;
  } else if (type == "sde") {
    out.type = ModelType::Sde;
  } else {
    Reader::fail(r.at("type"), "expected 'chain' or 'sde'");
  }
  if (auto c = r.child("chain")) {
    out.chain.name = c->string("name", out.chain.name);
    out.chain.weights = c->matrix("weights");
    out.chain.biases = c->matrix("biases");
    out.chain.matrix = c->matrix("matrix");
    const auto& n = out.chain.name;
    require(n == "symmetric_two_state" || n == "softmax_three_state" || n == "constant",
            c->at("name"), "unknown chain '" + n + "'");
    require(n != "constant" || !out.chain.matrix.empty(), c->at("matrix"),
            "a constant chain needs a matrix");
    c->finish();
  }
  if (auto nz = r.child("noise")) read_noise(std::move(*nz), out.noise);
  if (auto d = r.child("drift")) {
    out.drift.name = d->string("name", out.drift.name);
    require(out.drift.name == "affine" || out.drift.name == "sine_perturbed", d->at("name"),
            "expected 'affine' or 'sine_perturbed'");
    if (auto p = d->child("params")) {
      out.drift.b0 = p->number("b0", 0.0);
      p->finish();
    }
    out.drift.theta_interval = read_interval(*d, "theta_interval", out.drift.theta_interval);
    out.drift.theta_window = read_interval(*d, "theta_window", out.drift.theta_window);
    d->finish();
  }
  out.steps_per_h = r.count("steps_per_h", out.steps_per_h);
  require(out.steps_per_h >= 1, r.at("steps_per_h"), "must be >= 1");
  r.finish();
}

void require_increasing(const std::vector<std::size_t>& v, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] >= 1 && (i == 0 || v[i] > v[i - 1]), path, "must be a strictly increasing list of positive integers");
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Byte offset to line and column.
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << "malformed JSON at line " << line << ", column " << col << " (byte " << e.byte
        << "): " << e.what();
    throw ConfigError(msg.str());
  }

  ExperimentConfig cfg;
  cfg.source = std::string(text);
  Reader r(root, "$");
  if (auto m = r.child("model")) read_model(std::move(*m), cfg.model);
  cfg.theta0 = r.number("theta0", cfg.theta0);
  cfg.seed = read_seed(r.find("seed"));
  cfg.output_dir = r.string("output_dir", cfg.output_dir);

  if (auto s = r.child("scheme")) {
    cfg.scheme.h = s->number("h", cfg.scheme.h);
    cfg.scheme.n = s->count("n", cfg.scheme.n);
    cfg.scheme.n_grid = s->counts("n_grid", {});
    cfg.scheme.x0 = s->number("x0", cfg.scheme.x0);
    require(cfg.scheme.h > 0.0, s->at("h"), "h must be > 0");
    require(cfg.scheme.n >= 1, s->at("n"), "n must be >= 1");
    require_increasing(cfg.scheme.n_grid, s->at("n_grid"));
    s->finish();
  }

  if (auto l = r.child("lan")) {
    auto& lan = cfg.lan;
    lan.u_list = l->numbers("u_list", lan.u_list);
    lan.R = l->count("R", lan.R);
    lan.p_exponent = l->number("p_exponent", lan.p_exponent);
    lan.N_sup = l->number("N_sup", lan.N_sup);
    lan.v_points = l->count("v_points", lan.v_points);
    const std::string mode = l->string("fisher_mode", "exact");
    require(mode == "exact" || mode == "monte_carlo", l->at("fisher_mode"),
            "expected 'exact' or 'monte_carlo'");
    lan.fisher_mode = mode == "exact" ? FisherMode::Exact : FisherMode::MonteCarlo;
    lan.fisher_R = l->count("fisher_R", lan.fisher_R);
    lan.condition_R = l->count("condition_R", lan.condition_R);
    lan.max_discard_fraction = l->number("max_discard_fraction", lan.max_discard_fraction);
    lan.psi_n_grid = l->counts("psi_n_grid", {});
    require_increasing(lan.psi_n_grid, l->at("psi_n_grid"));
    require(!lan.u_list.empty(), l->at("u_list"), "must be non-empty");
    require(lan.R >= 100, l->at("R"), "lan_experiment requires R >= 100");
    require(lan.p_exponent > 2.0, l->at("p_exponent"), "p must be > 2");
    require(lan.N_sup > 0.0, l->at("N_sup"), "N must be > 0");
    require(lan.v_points >= 2, l->at("v_points"), "need at least 2 grid points");
    require(lan.fisher_R >= 2, l->at("fisher_R"), "need at least 2 paths");
    require(lan.condition_R >= 2, l->at("condition_R"), "need at least 2 paths");
    require(lan.max_discard_fraction >= 0.0 && lan.max_discard_fraction <= 1.0,
            l->at("max_discard_fraction"), "must lie in [0, 1]");
    l->finish();
  }

  if (auto e = r.child("estimation")) {
    auto& kde = cfg.estimation.kde;
    kde.M = e->count("M", kde.M);
    if (const json* bw = e->find("bandwidth")) {
      if (bw->is_string() && bw->get<std::string>() == "silverman") {
        kde.bandwidth_rule = BandwidthRule::Silverman;
      } else if (bw->is_number()) {
        kde.bandwidth_rule = BandwidthRule::Fixed;
        kde.fixed_bandwidth = bw->get<double>();
        require(kde.fixed_bandwidth > 0.0, e->at("bandwidth"), "bandwidth must be > 0");
      } else {
        Reader::fail(e->at("bandwidth"), "expected \"silverman\" or a positive number");
      }
    }
    kde.fd_step = e->number("fd_step", kde.fd_step);
    kde.richardson = e->boolean("richardson", kde.richardson);
    kde.common_random_numbers = e->boolean("common_random_numbers", kde.common_random_numbers);
    kde.log_bias_correction = e->boolean("log_bias_correction", kde.log_bias_correction);
    cfg.estimation.martingale_M = e->count("martingale_M", cfg.estimation.martingale_M);
    require(kde.M >= 100, e->at("M"), "M must be >= 100");
    require(kde.fd_step > 0.0, e->at("fd_step"), "fd_step must be > 0");
    require(cfg.estimation.martingale_M >= 2, e->at("martingale_M"), "must be >= 2");
    e->finish();
  }

  if (auto g = r.child("ergodics")) {
    auto& erg = cfg.ergodics;
    erg.T_list = g->numbers("T_list", erg.T_list);
    erg.batch_lens = g->counts("batch_lens", erg.batch_lens);
    erg.lag_grid = g->counts("lag_grid", erg.lag_grid);
    erg.p_list = g->numbers("p_list", erg.p_list);
    erg.path_length = g->count("path_length", erg.path_length);
    erg.burn_in_fraction = g->number("burn_in_fraction", erg.burn_in_fraction);
    erg.fisher_n_grid = g->counts("fisher_n_grid", {});
    for (std::size_t i = 0; i < erg.T_list.size(); ++i) {
      require(erg.T_list[i] > 0.0 && (i == 0 || erg.T_list[i] > erg.T_list[i - 1]), g->at("T_list"),
              "must be strictly increasing and positive");
    }
    require(!erg.batch_lens.empty(), g->at("batch_lens"), "must be non-empty");
    for (std::size_t b : erg.batch_lens) require(b >= 1, g->at("batch_lens"), "must be positive");
    require(!erg.lag_grid.empty(), g->at("lag_grid"), "must be non-empty");
    for (std::size_t k : erg.lag_grid) require(k >= 1, g->at("lag_grid"), "lags must be >= 1");
    for (double p : erg.p_list) require(p > 0.0, g->at("p_list"), "exponents must be > 0");
    require(erg.burn_in_fraction >= 0.0 && erg.burn_in_fraction < 1.0, g->at("burn_in_fraction"),
            "must lie in [0, 1)");
    require_increasing(erg.fisher_n_grid, g->at("fisher_n_grid"));
    g->finish();
  }

  if (auto c = r.child("checks")) {
    auto& ch = cfg.checks;
    if (c->has("beta")) ch.beta = c->number("beta", 0.0);
    else c->find("beta");
    ch.c0_probe_grid = c->numbers("c0_probe_grid", ch.c0_probe_grid);
    ch.eps_grid = c->numbers("eps_grid", ch.eps_grid);
    ch.x_grid = c->numbers("x_grid", ch.x_grid);
    ch.theta_grid = c->numbers("theta_grid", ch.theta_grid);
    ch.radius = c->number("radius", ch.radius);
    ch.moment_p = c->number("moment_p", ch.moment_p);
    ch.moment_t_grid = c->numbers("moment_t_grid", ch.moment_t_grid);
    ch.moment_paths = c->count("moment_paths", ch.moment_paths);
    require(!ch.beta || *ch.beta > 0.0, c->at("beta"), "beta must be > 0");
    require(ch.radius > 0.0, c->at("radius"), "radius must be > 0");
    require(ch.moment_paths >= 2, c->at("moment_paths"), "need at least 2 paths");
    c->finish();
  }
  r.finish();

  if (cfg.model.type == ModelType::Sde) {
    const double limit = 4.0 + cfg.model.noise.spec.beta;
    for (double p : cfg.ergodics.p_list) {
      require(p < limit, "$.ergodics.p_list", "exponents must be < 4 + beta");
    }
    require(cfg.checks.moment_p > 2.0 && cfg.checks.moment_p < limit, "$.checks.moment_p",
            "must lie in (2, 4 + beta)");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

BuiltModel build_model(const ExperimentConfig& config) {
  BuiltModel out;
  const auto& m = config.model;
  try {
    if (m.type == ModelType::Chain) {
      std::shared_ptr<FiniteChainModel> chain;
      if (m.chain.name == "symmetric_two_state") {
        chain = std::make_shared<FiniteChainModel>(symmetric_two_state_chain());
      } else if (m.chain.name == "softmax_three_state") {
        chain = std::make_shared<FiniteChainModel>(
            m.chain.weights.empty() && m.chain.biases.empty()
                ? softmax_three_state_chain()
                : softmax_three_state_chain(m.chain.weights, m.chain.biases));
      } else {
        chain = std::make_shared<FiniteChainModel>(constant_chain(m.chain.matrix));
      }
      out.chain = chain;
      out.model = chain;
    } else {
      const double h = config.scheme.h;
      IncrementSamplerConfig sampler = m.noise.sampler;
      if (!m.noise.delta_given) {
        sampler.delta_trunc = choose_truncation(m.noise.spec, h, m.noise.truncation_tol);
      }
      auto noise = std::make_shared<LevyNoise>(m.noise.spec, sampler);
      std::shared_ptr<DriftFamily> drift;
      if (m.drift.name == "affine") {
        drift = std::make_shared<AffineDrift>(m.drift.b0, m.drift.theta_interval, m.drift.theta_window);
      } else {
        drift = std::make_shared<SinePerturbedDrift>(m.drift.theta_interval, m.drift.theta_window);
      }
      auto sde = std::make_shared<SdeTransitionModel>(drift, noise, h,
                                                      h / static_cast<double>(m.steps_per_h),
                                                      config.estimation.kde);
      out.noise = noise;
      out.drift = drift;
      out.sde = sde;
      out.model = sde;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("$.model: ") + e.what());
  } catch (const InvalidSpec& e) {
    throw ConfigError(std::string("$.model: ") + e.what());
  }
  if (!out.model->theta_interval().contains(config.theta0)) {
    throw ConfigError("$.theta0: outside the model's parameter interval");
  }
  return out;
}

}  // namespace lanlab::harness
