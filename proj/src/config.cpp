#include "rdp/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "rdp/csv.hpp"

namespace rdp {
namespace {

[[noreturn]] void config_error(const std::string& msg) { throw Error("config_error", msg); }

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) config_error(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number()) config_error(where + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return number(j, key, where);
}

int integer_or(const Json& j, const char* key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) config_error(where + "." + key + " must be an integer");
  return v.get<int>();
}

bool bool_or(const Json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_boolean()) config_error(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string type_of(const Json& j, const std::string& where) {
  const Json& t = field(j, "type", where);
  if (!t.is_string()) config_error(where + ".type must be a string");
  return t.get<std::string>();
}

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      config_error(where + ": unknown field '" + key + "'");
  }
}

// Converts library validation errors raised while building into config errors.
template <class F>
auto guarded(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == "config_error") throw;
    config_error(where + ": " + e.what());
  }
}

}  // namespace

Schedule parse_schedule(const Json& j) {
  const std::string where = "schedule";
  if (j.is_null()) return Schedule::linear(1e-4, 0.02, 1000);
  return guarded(where, [&] {
    return Schedule::linear(number_or(j, "beta_min", 1e-4, where), number_or(j, "beta_max", 0.02, where),
                            integer_or(j, "n_steps", 1000, where));
  });
}

NoiseScheme parse_noise(const Json& j) {
  const std::string where = "noise";
  const std::string type = type_of(j, where);
  const double sigma = number(j, "sigma_y", where);
  NoiseScheme scheme;
  if (type == "gaussian") {
    scheme = GaussianNoise{sigma};
  } else if (type == "student_t") {
    scheme = StudentTNoise{number(j, "nu", where), sigma};
  } else if (type == "impulsive") {
    scheme = ImpulsiveNoise{sigma, number(j, "fraction", where), number(j, "magnitude", where)};
  } else if (type == "uniform_replacement") {
    scheme = UniformReplacementNoise{sigma, number(j, "fraction", where), number(j, "low", where),
                                     number(j, "high", where)};
  } else {
    config_error("noise.type '" + type + "' is not one of gaussian, student_t, impulsive, uniform_replacement");
  }
  guarded(where, [&] {
    validate(scheme);
    return 0;
  });
  return scheme;
}

std::optional<WeightSpec> parse_weight(const Json& j, double default_scale) {
  const std::string where = "weight";
  if (j.is_null()) return std::nullopt;
  const std::string type = type_of(j, where);
  WeightSpec spec;
  if (type == "uniform") {
    spec.fn = UniformWeight{};
  } else if (type == "imq") {
    spec.fn = ImqWeight{number_or(j, "c", 1.0, where)};
  } else if (type == "huber") {
    spec.fn = HuberWeight{number_or(j, "delta", 1.0, where)};
  } else if (type == "mahalanobis") {
    MahalanobisWeight m{number_or(j, "c", 1.0, where), Vector(), default_scale};
    if (j.contains("scales")) {
      const auto v = j.at("scales").get<std::vector<double>>();
      m.scales = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    spec.fn = m;
  } else if (type == "global_scale") {
    spec.fn = GlobalScaleWeight{number_or(j, "c", 1.0, where), number_or(j, "eps", 1e-3, where)};
  } else {
    config_error("weight.type '" + type + "' is not one of uniform, imq, huber, mahalanobis, global_scale");
  }
  if (j.contains("adaptive_q")) spec.adaptive_q = number(j, "adaptive_q", where);
  spec.c_min = number_or(j, "c_min", 1e-8, where);
  guarded(where, [&] {
    validate(spec);
    return 0;
  });
  return spec;
}

SamplerConfig parse_sampler(const Json& j, double default_scale) {
  const std::string where = "sampler";
  SamplerConfig c;
  reject_unknown(j,
                 {"name", "method", "weight", "temperature", "jacobian", "lgd", "pigdm_variance",
                  "differentiate_weights", "deterministic_last_step", "record_trajectory"},
                 where);
  const std::string method = field(j, "method", where).get<std::string>();
  if (method == "dps") c.method = Method::kDps;
  else if (method == "lgd") c.method = Method::kLgd;
  else if (method == "pigdm") c.method = Method::kPigdm;
  else config_error("sampler.method '" + method + "' is not one of dps, lgd, pigdm");

  if (j.contains("weight")) c.weight = parse_weight(j.at("weight"), default_scale);
  if (j.contains("temperature")) {
    const Json& t = j.at("temperature");
    const std::string rule = field(t, "rule", "temperature").get<std::string>();
    if (rule == "fixed") c.temperature_rule = TemperatureRule::kFixed;
    else if (rule == "residual_normalized") c.temperature_rule = TemperatureRule::kResidualNormalized;
    else config_error("temperature.rule '" + rule + "' is not one of fixed, residual_normalized");
    c.tau = number_or(t, "tau", 1.0, "temperature");
    c.tau_eps = number_or(t, "eps", 1e-8, "temperature");
  }
  if (j.contains("jacobian")) {
    const std::string jm = j.at("jacobian").get<std::string>();
    if (jm == "auto") c.jacobian = JacobianMode::kAuto;
    else if (jm == "exact") c.jacobian = JacobianMode::kExact;
    else if (jm == "surrogate") c.jacobian = JacobianMode::kSurrogate;
    else config_error("sampler.jacobian '" + jm + "' is not one of auto, exact, surrogate");
  }
  if (j.contains("lgd")) {
    c.lgd_n_mc = integer_or(j.at("lgd"), "n_mc", 10, "lgd");
    c.lgd_kappa = number_or(j.at("lgd"), "kappa", 1.0, "lgd");
  }
  if (j.contains("pigdm_variance")) {
    const std::string pv = j.at("pigdm_variance").get<std::string>();
    if (pv == "one_minus_alpha_bar") c.pigdm_variance = PigdmVariance::kOneMinusAlphaBar;
    else if (pv == "ratio") c.pigdm_variance = PigdmVariance::kRatio;
    else config_error("sampler.pigdm_variance '" + pv + "' is not one of one_minus_alpha_bar, ratio");
  }
  c.differentiate_weights = bool_or(j, "differentiate_weights", false, where);
  c.deterministic_last_step = bool_or(j, "deterministic_last_step", true, where);
  c.record_trajectory = bool_or(j, "record_trajectory", false, where);
  guarded(where, [&] {
    validate(c);
    return 0;
  });
  return c;
}

GridShape parse_grid(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    config_error("grid must be [rows, cols]");
  const GridShape g{j[0].get<int>(), j[1].get<int>()};
  if (g.rows <= 0 || g.cols <= 0) config_error("grid sides must be positive");
  return g;
}

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) config_error("run config must be a JSON object");
  reject_unknown(j,
                 {"$schema", "name", "description", "seed", "n_chains", "schedule", "prior", "model", "noise",
                  "ground_truth", "likelihood_sigma", "samplers", "metrics", "probe"},
                 "config");
  RunConfig cfg;
  cfg.raw = j;
  cfg.base_dir = base_dir;
  cfg.name = j.value("name", std::string("run"));
  const Json& seed = field(j, "seed", "config");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    config_error("config.seed must be a non-negative integer");
  cfg.seed = seed.get<std::uint64_t>();
  cfg.n_chains = integer_or(j, "n_chains", 1, "config");
  if (cfg.n_chains < 1) config_error("config.n_chains must be at least 1");
  cfg.schedule = parse_schedule(j.contains("schedule") ? j.at("schedule") : Json());
  cfg.prior = field(j, "prior", "config");
  cfg.model = field(j, "model", "config");
  cfg.noise = parse_noise(field(j, "noise", "config"));
  cfg.ground_truth = j.contains("ground_truth") ? j.at("ground_truth") : Json{{"source", "prior_sample"}};
  if (j.contains("likelihood_sigma")) cfg.likelihood_sigma = number(j, "likelihood_sigma", "config");
  const double scale = cfg.likelihood_sigma.value_or(nominal_sigma(cfg.noise));
  if (j.contains("samplers")) {
    const Json& s = j.at("samplers");
    if (!s.is_array()) config_error("config.samplers must be an array");
    for (std::size_t i = 0; i < s.size(); ++i) {
      NamedSampler ns;
      ns.config = parse_sampler(s[i], scale);
      ns.name = s[i].value("name", sampler_label(ns.config));
      for (const auto& prev : cfg.samplers)
        if (prev.name == ns.name) config_error("duplicate sampler name '" + ns.name + "'");
      cfg.samplers.push_back(std::move(ns));
    }
  }
  if (j.contains("metrics")) cfg.data_range = number_or(j.at("metrics"), "data_range", 1.0, "metrics");
  if (cfg.data_range <= 0.0) config_error("metrics.data_range must be positive");
  cfg.probe = j.contains("probe") ? j.at("probe") : Json::object();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

RunConfig with_overrides(const RunConfig& cfg, std::optional<std::uint64_t> seed, std::optional<int> chains) {
  Json j = cfg.raw;
  if (seed) j["seed"] = *seed;
  if (chains) j["n_chains"] = *chains;
  return parse_run_config(j, cfg.base_dir);
}

}  // namespace rdp
