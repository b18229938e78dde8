#include "pmmhf/config.hpp"

#include <cstdio>
#include <fstream>

#include "pmmhf/error.hpp"

namespace pmmhf {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j.at(key);
}

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(std::string("model parameter '") + key + "' is missing or not a number");
  return j.at(key).get<double>();
}

ModelParams parse_params(ModelKind family, const json& p) {
  switch (family) {
    case ModelKind::LG:
      return LgParams{require_number(p, "sigma_eta"), require_number(p, "rho"),
                      require_number(p, "sigma_v")};
    case ModelKind::SCD:
      return ScdParams{require_number(p, "alpha"), require_number(p, "beta"),
                       require_number(p, "phi"), require_number(p, "rho"),
                       require_number(p, "sigma_v")};
    case ModelKind::SV:
      return SvParams{require_number(p, "phi"), require_number(p, "rho"),
                      require_number(p, "sigma_v")};
  }
  return LgParams{};
}

json params_to_json(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LgParams>)
          return {{"sigma_eta", p.sigma_eta}, {"rho", p.rho}, {"sigma_v", p.sigma_v}};
        else if constexpr (std::is_same_v<P, ScdParams>)
          return {{"alpha", p.alpha}, {"beta", p.beta}, {"phi", p.phi}, {"rho", p.rho},
                  {"sigma_v", p.sigma_v}};
        else
          return {{"phi", p.phi}, {"rho", p.rho}, {"sigma_v", p.sigma_v}};
      },
      params);
}

std::string_view to_string(ResamplingScheme s) {
  return s == ResamplingScheme::Systematic ? "systematic" : "multinomial";
}

}  // namespace

FilterConfig FilterSpec::with_particles(std::size_t n) const {
  FilterConfig c;
  c.kind = kind;
  c.particles = n;
  c.options.matches = matches;
  c.options.sigma_size = sigma_size;
  c.options.resampling = resampling;
  return c;
}

Prior ExperimentConfig::prior() const {
  if (pmmh.prior.kind == "default") return default_prior(family);
  if (pmmh.prior.kind == "forecast_sv") {
    if (family != ModelKind::SV) throw ConfigError("the forecast_sv prior needs the SV model");
    return forecast_sv_prior();
  }
  if (pmmh.prior.kind == "normal") {
    const std::size_t d = pmmh.prior.mean.size();
    if (d != parameter_count(family)) throw ConfigError("prior mean has the wrong dimension");
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                    static_cast<Eigen::Index>(d));
    if (!pmmh.prior.covariance.empty()) {
      if (pmmh.prior.covariance.size() != d) throw ConfigError("prior covariance has the wrong size");
      for (std::size_t i = 0; i < d; ++i) {
        if (pmmh.prior.covariance[i].size() != d)
          throw ConfigError("prior covariance has the wrong size");
        for (std::size_t k = 0; k < d; ++k)
          cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
              pmmh.prior.covariance[i][k];
      }
    }
    return normal_prior(pmmh.prior.mean, cov);
  }
  throw ConfigError("unknown prior kind '" + pmmh.prior.kind + "'");
}

Model ExperimentConfig::model() const {
  if (!params) throw ConfigError("the model parameters are required for this command");
  try {
    return Model(*params);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid model parameters: ") + e.what());
  }
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.name = get_or<std::string>(j, "name", c.name);

  const json& model = section(j, "model");
  try {
    c.family = parse_model_kind(get_or<std::string>(model, "family", "LG"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (model.contains("params")) {
    const json& p = model.at("params");
    if (p.is_string()) {
      if (p.get<std::string>() != "estimate") throw ConfigError("model.params must be an object or \"estimate\"");
    } else if (p.is_object()) {
      c.params = parse_params(c.family, p);
    } else {
      throw ConfigError("model.params must be an object or \"estimate\"");
    }
  }

  const json& data = section(j, "data");
  const std::string source = get_or<std::string>(data, "source", "simulate");
  if (source == "simulate") {
    c.data.source = DataConfig::Source::Simulate;
  } else if (source == "file") {
    c.data.source = DataConfig::Source::File;
  } else {
    throw ConfigError("data.source must be 'simulate' or 'file'");
  }
  c.data.path = get_or<std::string>(data, "path", "");
  c.data.length = get_or<std::size_t>(data, "length", 0);
  c.data.dgp = get_or<std::string>(data, "dgp", "model");
  if (c.data.dgp != "model" && c.data.dgp != "svij")
    throw ConfigError("data.dgp must be 'model' or 'svij'");
  if (data.contains("seed")) c.data.seed = get_or<std::uint64_t>(data, "seed", 0);
  const json& sv = section(data, "svij");
  SvijParams& s = c.data.svij;
  s.kappa = get_or(sv, "kappa", s.kappa);
  s.theta_bar = get_or(sv, "theta_bar", s.theta_bar);
  s.sigma_v = get_or(sv, "sigma_v", s.sigma_v);
  s.p_jump_price = get_or(sv, "p_jump_price", s.p_jump_price);
  s.p_jump_vol = get_or(sv, "p_jump_vol", s.p_jump_vol);
  s.vol_jump_mean = get_or(sv, "vol_jump_mean", s.vol_jump_mean);
  s.price_jump_logsd = get_or(sv, "price_jump_logsd", s.price_jump_logsd);
  if (c.data.source == DataConfig::Source::File && c.data.path.empty())
    throw ConfigError("data.path is required when data.source is 'file'");
  if (c.data.source == DataConfig::Source::Simulate && c.data.length == 0)
    throw ConfigError("data.length is required when data.source is 'simulate'");
  if (c.data.source == DataConfig::Source::Simulate && c.data.dgp == "model" && !c.params)
    throw ConfigError("simulating from the model needs model.params");

  if (j.contains("filters")) {
    if (!j.at("filters").is_array()) throw ConfigError("'filters' must be an array");
    for (const json& f : j.at("filters")) {
      FilterSpec spec;
      try {
        spec.kind = parse_filter_kind(get_or<std::string>(f, "kind", ""));
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      if (f.contains("particles")) {
        const json& n = f.at("particles");
        if (n.is_string() && n.get<std::string>() == "calibrate") {
        } else if (n.is_number_unsigned() && n.get<std::size_t>() >= 2) {
          spec.particles = n.get<std::size_t>();
        } else {
          throw ConfigError("filter particles must be an integer >= 2 or \"calibrate\"");
        }
      }
      spec.matches = get_or<std::size_t>(f, "matches", 1);
      spec.sigma_size = get_or<int>(f, "sigma_size", 0);
      const std::string rs = get_or<std::string>(f, "resampling", "multinomial");
      if (rs == "systematic") {
        spec.resampling = ResamplingScheme::Systematic;
      } else if (rs != "multinomial") {
        throw ConfigError("resampling must be 'multinomial' or 'systematic'");
      }
      if (spec.kind != FilterKind::DPF && spec.matches != 1)
        throw ConfigError("matches only apply to the DPF");
      if (!supports(spec.kind, c.family))
        throw ConfigError(std::string(to_string(spec.kind)) + " is not available for the " +
                          std::string(to_string(c.family)) + " model");
      c.filters.push_back(spec);
    }
  }

  const json& cal = section(j, "calibration");
  c.calibration.n_s = get_or(cal, "n_s", c.calibration.n_s);
  c.calibration.replications = get_or(cal, "replications", c.calibration.replications);

  const json& pm = section(j, "pmmh");
  c.pmmh.iterations = get_or(pm, "iterations", c.pmmh.iterations);
  c.pmmh.burn_in = get_or(pm, "burn_in", c.pmmh.burn_in);
  if (pm.contains("theta0")) c.pmmh.theta0 = get_or<std::vector<double>>(pm, "theta0", {});
  if (pm.contains("prior")) {
    const json& pr = pm.at("prior");
    if (pr.is_string()) {
      c.pmmh.prior.kind = pr.get<std::string>();
    } else if (pr.is_object()) {
      c.pmmh.prior.kind = "normal";
      c.pmmh.prior.mean = get_or<std::vector<double>>(pr, "mean", {});
      c.pmmh.prior.covariance = get_or<std::vector<std::vector<double>>>(pr, "covariance", {});
    } else {
      throw ConfigError("pmmh.prior must be a name or an object");
    }
  }
  const json& prop = section(pm, "proposal");
  auto& ps = c.pmmh.proposal;
  ps.warmup = get_or(prop, "warmup", ps.warmup);
  ps.initial_sd = get_or(prop, "initial_sd", ps.initial_sd);
  ps.target_accept = get_or(prop, "target_accept", ps.target_accept);
  ps.decay = get_or(prop, "decay", ps.decay);
  ps.regularization = get_or(prop, "regularization", ps.regularization);

  const json& fc = section(j, "forecast");
  auto& f = c.forecast;
  f.horizon = get_or(fc, "horizon", f.horizon);
  f.refresh_every = get_or(fc, "refresh_every", f.refresh_every);
  f.mh_iterations = get_or(fc, "mh_iterations", f.mh_iterations);
  f.burn_in = get_or(fc, "burn_in", f.burn_in);
  f.thin = get_or(fc, "thin", f.thin);
  f.particles = get_or(fc, "particles", f.particles);
  f.grid.points = get_or(fc, "grid_points", f.grid.points);
  f.grid.width = get_or(fc, "grid_width", f.grid.width);

  if (!j.contains("seed") || !j.at("seed").is_number_unsigned())
    throw ConfigError("a non-negative integer 'seed' is required");
  c.seed = j.at("seed").get<std::uint64_t>();
  c.jobs = get_or(j, "jobs", c.jobs);
  if (c.jobs == 0) throw ConfigError("jobs must be at least 1");
  c.output = get_or<std::string>(j, "output", c.output);

  // Catches an unusable prior choice up front.
  const Prior prior = c.prior();
  if (prior.size() != parameter_count(c.family)) throw ConfigError("prior has the wrong dimension");
  if (c.pmmh.theta0 && c.pmmh.theta0->size() != parameter_count(c.family))
    throw ConfigError("pmmh.theta0 has the wrong dimension");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  ExperimentConfig c = parse_config(j);
  c.base_dir = path.parent_path();
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["model"] = {{"family", std::string(to_string(c.family))}};
  j["model"]["params"] = c.params ? params_to_json(*c.params) : json("estimate");

  json data;
  data["source"] = c.data.source == DataConfig::Source::File ? "file" : "simulate";
  data["path"] = c.data.path;
  data["length"] = c.data.length;
  data["dgp"] = c.data.dgp;
  if (c.data.seed) data["seed"] = *c.data.seed;
  const SvijParams& s = c.data.svij;
  data["svij"] = {{"kappa", s.kappa},
                  {"theta_bar", s.theta_bar},
                  {"sigma_v", s.sigma_v},
                  {"p_jump_price", s.p_jump_price},
                  {"p_jump_vol", s.p_jump_vol},
                  {"vol_jump_mean", s.vol_jump_mean},
                  {"price_jump_logsd", s.price_jump_logsd}};
  j["data"] = data;

  json filters = json::array();
  for (const auto& f : c.filters) {
    json e = {{"kind", std::string(to_string(f.kind))},
              {"matches", f.matches},
              {"sigma_size", f.sigma_size},
              {"resampling", std::string(to_string(f.resampling))}};
    e["particles"] = f.particles ? json(*f.particles) : json("calibrate");
    filters.push_back(e);
  }
  j["filters"] = filters;
  j["calibration"] = {{"n_s", c.calibration.n_s}, {"replications", c.calibration.replications}};

  json pm = {{"iterations", c.pmmh.iterations}, {"burn_in", c.pmmh.burn_in}};
  if (c.pmmh.prior.kind == "normal") {
    pm["prior"] = {{"mean", c.pmmh.prior.mean}, {"covariance", c.pmmh.prior.covariance}};
  } else {
    pm["prior"] = c.pmmh.prior.kind;
  }
  if (c.pmmh.theta0) pm["theta0"] = *c.pmmh.theta0;
  const auto& ps = c.pmmh.proposal;
  pm["proposal"] = {{"warmup", ps.warmup},
                    {"initial_sd", ps.initial_sd},
                    {"target_accept", ps.target_accept},
                    {"decay", ps.decay},
                    {"regularization", ps.regularization}};
  j["pmmh"] = pm;

  const auto& f = c.forecast;
  j["forecast"] = {{"horizon", f.horizon},         {"refresh_every", f.refresh_every},
                   {"mh_iterations", f.mh_iterations}, {"burn_in", f.burn_in},
                   {"thin", f.thin},               {"particles", f.particles},
                   {"grid_points", f.grid.points}, {"grid_width", f.grid.width}};
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["output"] = c.output;
  return j;
}

std::string canonical_json(const json& j) { return j.dump(); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pmmhf
