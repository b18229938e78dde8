#ifndef PMMHF_PMMH_HPP
#define PMMHF_PMMH_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmmhf/filters.hpp"
#include "pmmhf/models.hpp"
#include "pmmhf/random.hpp"

namespace pmmhf {

// ---------------------------------------------------------------------------
// Sampling-scale parameterization
//
//   LG : (log sigma_eta^2, rho, log sigma_v^2)
//   SCD: (log alpha, log beta, phi, rho, log sigma_v^2)
//   SV : (phi, rho, log sigma_v^2)
// ---------------------------------------------------------------------------

std::vector<std::string> parameter_names(ModelKind family);
std::size_t parameter_count(ModelKind family);
/// nullopt when theta maps outside the model's domain (e.g. |rho| >= 1).
std::optional<Model> model_from_theta(ModelKind family, std::span<const double> theta);
std::vector<double> theta_from_model(const Model& model);

struct PriorTerm {
  enum class Law { Normal, Beta };
  Law law = Law::Normal;
  double a = 0.0;  // Normal: mean      Beta: alpha
  double b = 1.0;  // Normal: variance  Beta: beta
};

/// Independent per-coordinate laws, except that the Normal coordinates share
/// `normal_covariance` when it is set (a full Sigma_0 over those coordinates,
/// in their order).
struct Prior {
  std::vector<PriorTerm> terms;
  std::optional<Eigen::MatrixXd> normal_covariance;

  std::size_t size() const { return terms.size(); }
};

Prior normal_prior(std::span<const double> mean, const Eigen::MatrixXd& covariance);
/// N(mu_0, I) priors used by the simulation study for each family.
Prior default_prior(ModelKind family);
/// phi ~ N(0, 10), rho ~ Beta(20, 1.5), log sigma_v^2 ~ N(0, 10).
Prior forecast_sv_prior();

/// -inf outside the support; InputError on a dimension mismatch.
double log_prior(const Prior& prior, std::span<const double> theta);

struct LogTarget {
  double loglik = 0.0;
  double logprior = 0.0;
};

/// min(0, delta loglik + delta logprior) for a symmetric proposal; -inf if
/// the candidate has a -inf component.
double mh_accept_logratio(const LogTarget& candidate, const LogTarget& current);

/// Random-walk proposal whose covariance tracks the chain history.
///
/// During warm-up the proposal is N(current, initial_sd^2 I). Afterwards it is
/// N(current, s * (2.38^2 / d) * (C + eps I)) where C is the empirical
/// covariance of every recorded state, eps = regularization * trace(C) / d,
/// and log s follows a Robbins-Monro recursion with step i^-decay towards the
/// target acceptance probability.
class AdaptiveProposal {
 public:
  struct Settings {
    std::size_t warmup = 500;
    double initial_sd = 0.1;
    double target_accept = 0.234;
    double decay = 0.6;
    double regularization = 1e-6;
  };

  AdaptiveProposal(std::size_t dim, Settings settings);

  std::vector<double> propose(std::span<const double> current, Rng& rng) const;
  /// Records the chain state after an iteration together with that
  /// iteration's acceptance probability.
  void update(std::span<const double> state, double accept_prob);

  Eigen::MatrixXd proposal_covariance() const;
  double scale() const { return std::exp(log_scale_); }
  std::size_t recorded() const { return count_; }
  const Settings& settings() const { return settings_; }

  /// Test hook: pins the scale; zero makes every proposal equal the current
  /// point.
  void force_scale(double s);

 private:
  std::size_t dim_;
  Settings settings_;
  std::size_t count_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
  double log_scale_ = 0.0;
  bool frozen_ = false;
  bool zero_ = false;
};

struct Chain {
  std::vector<std::string> names;
  std::vector<std::vector<double>> draws;  // one row per iteration
  std::vector<double> loglik;
  std::vector<double> logprior;
  std::vector<char> accepted;
  std::size_t burn_in = 0;
  /// Wall-clock seconds of each likelihood evaluation, in order. Candidates
  /// rejected on the prior alone are not evaluated and not timed.
  std::vector<double> likelihood_seconds;
  std::string filter_label;
  std::size_t particles = 0;

  std::size_t size() const { return draws.size(); }
  /// Column `k` after burn-in.
  std::vector<double> trace(std::size_t k, bool include_burn_in = false) const;
  double acceptance_rate() const;
};

/// log p_hat(y | theta); the second argument seeds a fresh random stream.
using LogLikelihood = std::function<double(std::span<const double> theta, std::uint64_t seed)>;

struct MhSettings {
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::uint64_t seed = 1;
  AdaptiveProposal::Settings proposal;
  /// Test hook: forces the proposal scale (see AdaptiveProposal::force_scale).
  std::optional<double> forced_scale;
};

/// Metropolis-Hastings with an arbitrary (possibly noisy) log-likelihood. The
/// current state's log-likelihood is kept on rejection and replaced on
/// acceptance, which is the pseudo-marginal rule.
Chain run_mh(const LogLikelihood& loglik, const Prior& prior, std::vector<double> theta0,
             const MhSettings& settings, std::vector<std::string> names = {});

/// Particle-filter log-likelihood for a family, -inf outside the domain.
LogLikelihood filter_loglik(const FilterConfig& filter, ModelKind family,
                            std::vector<double> y);
/// Exact Kalman log-likelihood for the LG family.
LogLikelihood kalman_loglik_fn(std::vector<double> y);

Chain run_pmmh(const FilterConfig& filter, ModelKind family, const Prior& prior,
               std::span<const double> y, std::vector<double> theta0,
               const MhSettings& settings);

inline constexpr double kTargetLogLikVariance = 0.85;

/// round(N_s * variance / 0.85), at least 2.
std::size_t nopt_from_variance(std::size_t n_s, double variance);

struct NoptCalibration {
  std::size_t n_opt = 0;
  double loglik_variance = 0.0;
  std::size_t replications = 0;  // finite replications used
  std::size_t excluded = 0;      // degenerate replications dropped
  double mean_seconds = 0.0;
};

/// R_0 independent filter runs at the given model with N_s particles; the
/// sample variance of the log-likelihood estimates sets N_opt. Throws
/// NumericalError if fewer than two replications are finite.
NoptCalibration calibrate_nopt(const FilterConfig& filter, const Model& model,
                               std::span<const double> y, std::size_t n_s, std::size_t r0,
                               std::uint64_t seed);

}  // namespace pmmhf

#endif
