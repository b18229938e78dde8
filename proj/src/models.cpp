#include "pmmhf/models.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pmmhf/error.hpp"
#include "pmmhf/numeric.hpp"

namespace pmmhf {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

void check_ar(double rho, double sigma_v) {
  require(std::isfinite(rho) && std::abs(rho) < 1.0, "state AR coefficient must satisfy |rho| < 1");
  require(std::isfinite(sigma_v) && sigma_v > 0.0, "state noise sd must be positive");
}

// var(log eta) for eta ~ Gamma(alpha, rate); the rate only shifts log eta,
// so integrate the unit-rate log-gamma density over the real line.
double log_gamma_variance(double alpha) {
  using boost::math::quadrature::gauss_kronrod;
  const double lg = std::lgamma(alpha);
  auto density = [&](double e) { return std::exp(alpha * e - std::exp(e) - lg); };
  const double inf = std::numeric_limits<double>::infinity();
  const double m = gauss_kronrod<double, 61>::integrate(
      [&](double e) { return e * density(e); }, -inf, inf, 15, 1e-13);
  const double v = gauss_kronrod<double, 61>::integrate(
      [&](double e) { return (e - m) * (e - m) * density(e); }, -inf, inf, 15, 1e-13);
  return v;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LG: return "LG";
    case ModelKind::SCD: return "SCD";
    case ModelKind::SV: return "SV";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "LG") return ModelKind::LG;
  if (name == "SCD") return ModelKind::SCD;
  if (name == "SV") return ModelKind::SV;
  throw InputError("unknown model family '" + std::string(name) + "'");
}

void Model::init_common(double intercept, double rho, double sigma_v) {
  check_ar(rho, sigma_v);
  require(std::isfinite(intercept), "state intercept must be finite");
  intercept_ = intercept;
  rho_ = rho;
  sigma_v_ = sigma_v;
  log_sigma_v_ = std::log(sigma_v);
}

Model::Model(const LgParams& p) : kind_(ModelKind::LG), params_(p) {
  require(std::isfinite(p.sigma_eta) && p.sigma_eta > 0.0, "LG measurement sd must be positive");
  init_common(0.0, p.rho, p.sigma_v);
  error_law_ = ErrorLaw::normal(0.0, 1.0);
  inversion_law_ = error_law_;
  log_meas_const_ = -0.5 * kLogTwoPi - std::log(p.sigma_eta);
}

Model::Model(const ScdParams& p) : kind_(ModelKind::SCD), params_(p) {
  require(std::isfinite(p.alpha) && p.alpha > 0.0, "SCD gamma shape must be positive");
  require(std::isfinite(p.beta) && p.beta > 0.0, "SCD gamma rate must be positive");
  init_common(p.phi, p.rho, p.sigma_v);
  error_law_ = ErrorLaw::gamma(p.alpha, p.beta);
  inversion_law_ = error_law_;
  log_meas_const_ = p.alpha * std::log(p.beta) - std::lgamma(p.alpha);
}

Model::Model(const SvParams& p) : kind_(ModelKind::SV), params_(p) {
  init_common(p.phi, p.rho, p.sigma_v);
  error_law_ = ErrorLaw::normal(0.0, 1.0);
  inversion_law_ = ErrorLaw::half_normal(1.0);
  log_inversion_ratio_ = -std::numbers::ln2;
}

Model::Model(const ModelParams& p)
    : Model(std::visit([](const auto& q) { return Model(q); }, p)) {}

double Model::stationary_mean() const { return intercept_ / (1.0 - rho_); }

double Model::stationary_variance() const {
  return sigma_v_ * sigma_v_ / (1.0 - rho_ * rho_);
}

double Model::initial_mean() const { return stationary_mean(); }

double Model::initial_variance() const {
  if (kind_ == ModelKind::LG) return stationary_variance();
  return sigma_v_ * sigma_v_ / ((1.0 - rho_) * (1.0 - rho_));
}

double Model::log_transition_density(double x_prev, double x_next) const {
  const double d = (x_next - transition_mean(x_prev)) / sigma_v_;
  return -0.5 * kLogTwoPi - log_sigma_v_ - 0.5 * d * d;
}

double Model::transition_density(double x_prev, double x_next) const {
  return std::exp(log_transition_density(x_prev, x_next));
}

double Model::log_measurement_density(double x, double y) const {
  switch (kind_) {
    case ModelKind::LG: {
      const double d = (y - x) / std::get<LgParams>(params_).sigma_eta;
      return log_meas_const_ - 0.5 * d * d;
    }
    case ModelKind::SCD: {
      if (!(y > 0.0)) throw DomainError("SCD observations must be positive");
      const double alpha = std::get<ScdParams>(params_).alpha;
      const double beta = std::get<ScdParams>(params_).beta;
      const double u = y * std::exp(-x);
      return log_meas_const_ + (alpha - 1.0) * std::log(u) - beta * u - x;
    }
    case ModelKind::SV: {
      const double d2 = y * y * std::exp(-x);
      return -0.5 * (kLogTwoPi + x + d2);
    }
  }
  return kNegInf;
}

double Model::measurement_density(double x, double y) const {
  return std::exp(log_measurement_density(x, y));
}

double Model::measure(double x, double eta) const {
  switch (kind_) {
    case ModelKind::LG: return x + std::get<LgParams>(params_).sigma_eta * eta;
    case ModelKind::SCD: return std::exp(x) * eta;
    case ModelKind::SV: return std::exp(0.5 * x) * eta;
  }
  return 0.0;
}

bool Model::invertible(double y) const {
  switch (kind_) {
    case ModelKind::LG: return std::isfinite(y);
    case ModelKind::SCD: return y > 0.0 && std::isfinite(y);
    case ModelKind::SV: return y != 0.0 && std::isfinite(y);
  }
  return false;
}

Inversion Model::invert_measurement(double y, double eta) const {
  switch (kind_) {
    case ModelKind::LG:
      return {y - std::get<LgParams>(params_).sigma_eta * eta, 1.0};
    case ModelKind::SCD:
      if (!(y > 0.0) || !(eta > 0.0))
        throw DomainError("SCD inversion needs y > 0 and eta > 0");
      return {std::log(y / eta), 1.0 / y};
    case ModelKind::SV: {
      if (y == 0.0 || eta == 0.0) throw DomainError("SV inversion needs y != 0 and eta != 0");
      const double ay = std::abs(y);
      return {2.0 * std::log(ay / std::abs(eta)), 2.0 / ay};
    }
  }
  throw DomainError("unknown model");
}

double Model::sample_initial(Rng& rng) const {
  return initial_mean() + std::sqrt(initial_variance()) * standard_normal(rng);
}

double Model::sample_transition(double x_prev, Rng& rng) const {
  return transition_mean(x_prev) + sigma_v_ * standard_normal(rng);
}

double Model::sample_observation(double x, Rng& rng) const {
  return measure(x, error_law_.sample(rng));
}

double Model::measurement_error_variance() const {
  switch (kind_) {
    case ModelKind::LG: {
      const double s = std::get<LgParams>(params_).sigma_eta;
      return s * s;
    }
    case ModelKind::SCD: return log_gamma_variance(std::get<ScdParams>(params_).alpha);
    case ModelKind::SV: return std::numbers::pi * std::numbers::pi / 2.0;
  }
  return 0.0;
}

double Model::snr() const { return stationary_variance() / measurement_error_variance(); }

double Model::transform_observation(double y) const {
  switch (kind_) {
    case ModelKind::LG: return y;
    case ModelKind::SCD:
      if (!(y > 0.0)) throw DomainError("SCD observations must be positive");
      return std::log(y);
    case ModelKind::SV: return std::log(y * y);
  }
  return 0.0;
}

double Model::log_transformed_density(double z, double x) const {
  switch (kind_) {
    case ModelKind::LG: {
      const double s = std::get<LgParams>(params_).sigma_eta;
      return normal_log_pdf(z, x, s * s);
    }
    case ModelKind::SCD: {
      // z = x + log eta; density of log eta at e is Gamma(e^e) e^e
      const double alpha = std::get<ScdParams>(params_).alpha;
      const double beta = std::get<ScdParams>(params_).beta;
      const double e = z - x;
      return log_meas_const_ + alpha * e - beta * std::exp(e);
    }
    case ModelKind::SV: {
      const double e = z - x;
      return -0.5 * kLogTwoPi + 0.5 * e - 0.5 * std::exp(e);
    }
  }
  return kNegInf;
}

double Model::transformed_error_mean() const {
  switch (kind_) {
    case ModelKind::LG: return 0.0;
    case ModelKind::SCD: {
      const auto& p = std::get<ScdParams>(params_);
      return boost::math::digamma(p.alpha) - std::log(p.beta);
    }
    case ModelKind::SV: return boost::math::digamma(0.5) + std::numbers::ln2;
  }
  return 0.0;
}

double Model::transformed_error_variance() const {
  switch (kind_) {
    case ModelKind::LG: return measurement_error_variance();
    case ModelKind::SCD: return boost::math::trigamma(std::get<ScdParams>(params_).alpha);
    case ModelKind::SV: return std::numbers::pi * std::numbers::pi / 2.0;
  }
  return 0.0;
}

SimulatedSeries simulate(const Model& model, std::size_t T, std::uint64_t seed) {
  if (T == 0) throw InputError("simulate needs T >= 1");
  Rng rng = make_stream(seed);
  SimulatedSeries out;
  out.x.resize(T + 1);
  out.y.resize(T);
  out.x[0] = model.sample_initial(rng);
  for (std::size_t t = 1; t <= T; ++t) {
    out.x[t] = model.sample_transition(out.x[t - 1], rng);
    out.y[t - 1] = model.sample_observation(out.x[t], rng);
  }
  return out;
}

void validate(const SvijParams& p) {
  require(p.kappa > 0.0 && p.kappa <= 1.0, "SVIJ kappa must lie in (0, 1]");
  require(p.theta_bar > 0.0, "SVIJ theta_bar must be positive");
  require(p.sigma_v > 0.0, "SVIJ sigma_v must be positive");
  require(p.p_jump_price >= 0.0 && p.p_jump_price <= 1.0, "SVIJ price jump probability outside [0, 1]");
  require(p.p_jump_vol >= 0.0 && p.p_jump_vol <= 1.0, "SVIJ volatility jump probability outside [0, 1]");
  require(p.vol_jump_mean > 0.0, "SVIJ volatility jump mean must be positive");
  require(p.price_jump_logsd > 0.0, "SVIJ price jump log-sd must be positive");
}

SvijPath simulate_svij_path(const SvijParams& p, std::size_t T, std::uint64_t seed) {
  validate(p);
  if (T == 0) throw InputError("simulate_svij needs T >= 1");
  Rng rng = make_stream(seed);
  std::exponential_distribution<double> jump_x(1.0 / p.vol_jump_mean);

  SvijPath out;
  out.x.resize(T + 1);
  out.y.resize(T);
  out.price_jump.resize(T);
  out.price_jump_size.resize(T);
  out.vol_jump.resize(T);
  out.vol_jump_size.resize(T);
  out.x[0] = p.theta_bar;

  for (std::size_t t = 1; t <= T; ++t) {
    const double zeta_x = standard_normal(rng);
    const double zeta_p = standard_normal(rng);
    const double u_x = uniform01(rng);
    const double u_p = uniform01(rng);
    const double z_x = jump_x(rng);
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    const double m = p.price_jump_logsd * standard_normal(rng);

    const bool dn_x = u_x < p.p_jump_vol;
    const bool dn_p = u_p < p.p_jump_price;
    const double prev = out.x[t - 1];
    double next = p.kappa * p.theta_bar + (1.0 - p.kappa) * prev +
                  p.sigma_v * std::sqrt(prev) * zeta_x + (dn_x ? z_x : 0.0);
    if (next < kSvijVarianceFloor) {
      next = kSvijVarianceFloor;
      ++out.truncations;
    }
    out.x[t] = next;
    const double z_p = sign * std::exp(m);
    out.y[t - 1] = std::sqrt(next) * zeta_p + (dn_p ? z_p : 0.0);
    out.price_jump[t - 1] = dn_p;
    out.price_jump_size[t - 1] = z_p;
    out.vol_jump[t - 1] = dn_x;
    out.vol_jump_size[t - 1] = z_x;
  }
  return out;
}

std::vector<double> simulate_svij(const SvijParams& p, std::size_t T, std::uint64_t seed) {
  return simulate_svij_path(p, T, seed).y;
}

}  // namespace pmmhf
