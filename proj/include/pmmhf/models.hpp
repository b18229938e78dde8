#ifndef PMMHF_MODELS_HPP
#define PMMHF_MODELS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pmmhf/error_law.hpp"
#include "pmmhf/random.hpp"

namespace pmmhf {

enum class ModelKind { LG, SCD, SV };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// y = x + sigma_eta * eta,  x' = rho * x + sigma_v * v.
struct LgParams {
  double sigma_eta = 1.0;
  double rho = 0.0;
  double sigma_v = 1.0;
};

/// y = exp(x) * eta with eta ~ Gamma(alpha, rate beta),
/// x' = phi + rho * x + sigma_v * v.
struct ScdParams {
  double alpha = 1.0;
  double beta = 1.0;
  double phi = 0.0;
  double rho = 0.0;
  double sigma_v = 1.0;
};

/// y = exp(x / 2) * eta,  x' = phi + rho * x + sigma_v * v.
struct SvParams {
  double phi = 0.0;
  double rho = 0.0;
  double sigma_v = 1.0;
};

using ModelParams = std::variant<LgParams, ScdParams, SvParams>;

struct Inversion {
  double x;
  /// |dh/dx|^{-1} at the root.
  double jac_inv;
};

struct SimulatedSeries {
  std::vector<double> y;  // y_1..y_T
  std::vector<double> x;  // x_0..x_T
};

/// A validated scalar state space model with Gaussian AR(1) state.
/// Construction throws DomainError on invalid parameters.
class Model {
 public:
  explicit Model(const LgParams& p);
  explicit Model(const ScdParams& p);
  explicit Model(const SvParams& p);
  explicit Model(const ModelParams& p);

  ModelKind kind() const { return kind_; }
  const ModelParams& params() const { return params_; }

  double intercept() const { return intercept_; }
  double rho() const { return rho_; }
  double sigma_v() const { return sigma_v_; }

  double transition_mean(double x_prev) const { return intercept_ + rho_ * x_prev; }
  double transition_variance() const { return sigma_v_ * sigma_v_; }

  /// Moments of the AR(1) stationary law: phi/(1-rho), sigma_v^2/(1-rho^2).
  double stationary_mean() const;
  double stationary_variance() const;

  /// Law of x_0. LG uses the stationary law; SCD and SV use
  /// N(phi/(1-rho), sigma_v^2/(1-rho)^2).
  double initial_mean() const;
  double initial_variance() const;

  double log_transition_density(double x_prev, double x_next) const;
  double transition_density(double x_prev, double x_next) const;

  /// Throws DomainError for SCD with y <= 0.
  double log_measurement_density(double x, double y) const;
  double measurement_density(double x, double y) const;

  /// h(x, eta).
  double measure(double x, double eta) const;

  /// Unique x with y = h(x, eta). SV uses the root through |y| / |eta|.
  Inversion invert_measurement(double y, double eta) const;
  /// Whether the data-driven proposals can invert at y.
  bool invertible(double y) const;

  /// p(eta).
  const ErrorLaw& error_law() const { return error_law_; }
  /// Law the data-driven proposals draw eta from before inverting.
  /// Equal to error_law() except SV, which draws |eta|.
  const ErrorLaw& inversion_law() const { return inversion_law_; }
  /// log of p(eta) / q(eta) on the admissible region, where q is
  /// inversion_law(). Zero for LG and SCD, log(1/2) for SV.
  double log_inversion_ratio() const { return log_inversion_ratio_; }

  double sample_initial(Rng& rng) const;
  double sample_transition(double x_prev, Rng& rng) const;
  double sample_observation(double x, Rng& rng) const;

  /// Variance of the additive error in the transformed measurement
  /// equation: sigma_eta^2 (LG), var(log eta) (SCD, by quadrature),
  /// pi^2 / 2 (SV).
  double measurement_error_variance() const;
  /// stationary_variance() / measurement_error_variance().
  double snr() const;

  /// z = y (LG), log y (SCD), log y^2 (SV); z = x + eps with eps
  /// independent of x.
  double transform_observation(double y) const;
  /// log density of z given the state x.
  double log_transformed_density(double z, double x) const;
  /// Mean and variance of eps in z = x + eps.
  double transformed_error_mean() const;
  double transformed_error_variance() const;

 private:
  void init_common(double intercept, double rho, double sigma_v);

  ModelKind kind_;
  ModelParams params_;
  double intercept_ = 0.0;
  double rho_ = 0.0;
  double sigma_v_ = 1.0;
  double log_sigma_v_ = 0.0;
  double log_meas_const_ = 0.0;
  ErrorLaw error_law_;
  ErrorLaw inversion_law_;
  double log_inversion_ratio_ = 0.0;
};

/// Draws x_0 from the initial law, then T transitions and observations.
/// Deterministic given the seed.
SimulatedSeries simulate(const Model& model, std::size_t T, std::uint64_t seed);

/// Square-root stochastic volatility with independent jumps in price and
/// variance. kappa, theta_bar and sigma_v default to placeholders.
struct SvijParams {
  double kappa = 0.02;
  double theta_bar = 1.0;
  double sigma_v = 0.1;
  double p_jump_price = 0.15;
  double p_jump_vol = 0.20;
  double vol_jump_mean = 0.02;
  double price_jump_logsd = 0.70710678118654752;  // var(M) = 0.5
};

struct SvijPath {
  std::vector<double> y;              // y_1..y_T
  std::vector<double> x;              // x_0..x_T
  std::vector<bool> price_jump;       // dN^p_t
  std::vector<double> price_jump_size;  // Z^p_t, drawn every period
  std::vector<bool> vol_jump;         // dN^x_t
  std::vector<double> vol_jump_size;  // Z^x_t, drawn every period
  std::size_t truncations = 0;        // steps where x was floored
};

inline constexpr double kSvijVarianceFloor = 1e-8;

/// Every period draws, in order: zeta^x, zeta^p, U^x, U^p, Z^x, S, M.
/// All variates are drawn regardless of the jump probabilities, so
/// disabling jumps leaves the diffusion draws unchanged. The variance
/// update uses sqrt(x_{t-1}) and is floored at kSvijVarianceFloor.
SvijPath simulate_svij_path(const SvijParams& p, std::size_t T, std::uint64_t seed);
std::vector<double> simulate_svij(const SvijParams& p, std::size_t T, std::uint64_t seed);

void validate(const SvijParams& p);

}  // namespace pmmhf

#endif
