#include "pmmhf/pmmh.hpp"

#include <chrono>
#include <cmath>

#include "pmmhf/error.hpp"
#include "pmmhf/kalman.hpp"
#include "pmmhf/numeric.hpp"

namespace pmmhf {

namespace {

constexpr std::uint64_t kProposalSalt = 0x70726f706f73616cULL;
constexpr std::uint64_t kLikelihoodSalt = 0x6c696b656c69686fULL;

}  // namespace

std::vector<std::string> parameter_names(ModelKind family) {
  switch (family) {
    case ModelKind::LG: return {"log_sigma_eta2", "rho", "log_sigma_v2"};
    case ModelKind::SCD: return {"log_alpha", "log_beta", "phi", "rho", "log_sigma_v2"};
    case ModelKind::SV: return {"phi", "rho", "log_sigma_v2"};
  }
  return {};
}

std::size_t parameter_count(ModelKind family) { return parameter_names(family).size(); }

std::optional<Model> model_from_theta(ModelKind family, std::span<const double> theta) {
  if (theta.size() != parameter_count(family))
    throw InputError("parameter vector has the wrong dimension");
  for (double v : theta)
    if (!std::isfinite(v)) return std::nullopt;
  try {
    switch (family) {
      case ModelKind::LG:
        return Model(LgParams{std::exp(0.5 * theta[0]), theta[1], std::exp(0.5 * theta[2])});
      case ModelKind::SCD:
        return Model(ScdParams{std::exp(theta[0]), std::exp(theta[1]), theta[2], theta[3],
                               std::exp(0.5 * theta[4])});
      case ModelKind::SV:
        return Model(SvParams{theta[0], theta[1], std::exp(0.5 * theta[2])});
    }
  } catch (const DomainError&) {
  }
  return std::nullopt;
}

std::vector<double> theta_from_model(const Model& model) {
  const ModelParams& p = model.params();
  switch (model.kind()) {
    case ModelKind::LG: {
      const auto& q = std::get<LgParams>(p);
      return {2.0 * std::log(q.sigma_eta), q.rho, 2.0 * std::log(q.sigma_v)};
    }
    case ModelKind::SCD: {
      const auto& q = std::get<ScdParams>(p);
      return {std::log(q.alpha), std::log(q.beta), q.phi, q.rho, 2.0 * std::log(q.sigma_v)};
    }
    case ModelKind::SV: {
      const auto& q = std::get<SvParams>(p);
      return {q.phi, q.rho, 2.0 * std::log(q.sigma_v)};
    }
  }
  return {};
}

Prior normal_prior(std::span<const double> mean, const Eigen::MatrixXd& covariance) {
  const auto d = static_cast<Eigen::Index>(mean.size());
  if (covariance.rows() != d || covariance.cols() != d)
    throw InputError("prior covariance does not match the mean dimension");
  Prior prior;
  for (Eigen::Index i = 0; i < d; ++i)
    prior.terms.push_back({PriorTerm::Law::Normal, mean[static_cast<std::size_t>(i)],
                           covariance(i, i)});
  if (!covariance.isDiagonal()) prior.normal_covariance = covariance;
  return prior;
}

Prior default_prior(ModelKind family) {
  std::vector<double> mu;
  switch (family) {
    case ModelKind::LG: mu = {std::log(0.7), 0.5, std::log(0.475)}; break;
    case ModelKind::SCD: mu = {std::log(2.0), std::log(0.5), -0.8, 0.5, std::log(0.5)}; break;
    case ModelKind::SV: mu = {-4.6, 0.8, std::log(0.5)}; break;
  }
  const auto d = static_cast<Eigen::Index>(mu.size());
  return normal_prior(mu, Eigen::MatrixXd::Identity(d, d));
}

Prior forecast_sv_prior() {
  Prior prior;
  prior.terms = {{PriorTerm::Law::Normal, 0.0, 10.0},
                 {PriorTerm::Law::Beta, 20.0, 1.5},
                 {PriorTerm::Law::Normal, 0.0, 10.0}};
  return prior;
}

double log_prior(const Prior& prior, std::span<const double> theta) {
  if (theta.size() != prior.size()) throw InputError("theta dimension does not match the prior");
  double lp = 0.0;
  std::vector<std::size_t> normal_idx;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const PriorTerm& term = prior.terms[i];
    const double x = theta[i];
    if (std::isnan(x)) return kNegInf;
    if (term.law == PriorTerm::Law::Beta) {
      if (!(x > 0.0 && x < 1.0)) return kNegInf;
      lp += (term.a - 1.0) * std::log(x) + (term.b - 1.0) * std::log1p(-x) -
            (std::lgamma(term.a) + std::lgamma(term.b) - std::lgamma(term.a + term.b));
    } else if (prior.normal_covariance) {
      normal_idx.push_back(i);
    } else {
      lp += normal_log_pdf(x, term.a, term.b);
    }
  }
  if (!normal_idx.empty()) {
    const Eigen::MatrixXd& cov = *prior.normal_covariance;
    const auto d = static_cast<Eigen::Index>(normal_idx.size());
    if (cov.rows() != d) throw InputError("prior covariance does not match the normal coordinates");
    Eigen::VectorXd r(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const std::size_t k = normal_idx[static_cast<std::size_t>(i)];
      r(i) = theta[k] - prior.terms[k].a;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw InputError("prior covariance is not positive definite");
    const Eigen::VectorXd s = llt.matrixL().solve(r);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    lp += -0.5 * (static_cast<double>(d) * kLogTwoPi + logdet + s.squaredNorm());
  }
  return lp;
}

double mh_accept_logratio(const LogTarget& candidate, const LogTarget& current) {
  if (!(candidate.loglik > kNegInf) || !(candidate.logprior > kNegInf)) return kNegInf;
  if (std::isnan(candidate.loglik) || std::isnan(candidate.logprior)) return kNegInf;
  const double r = (candidate.loglik - current.loglik) + (candidate.logprior - current.logprior);
  return std::min(0.0, r);
}

AdaptiveProposal::AdaptiveProposal(std::size_t dim, Settings settings)
    : dim_(dim),
      settings_(settings),
      mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
      m2_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {
  if (dim == 0) throw InputError("proposal dimension must be positive");
}

void AdaptiveProposal::force_scale(double s) {
  frozen_ = true;
  zero_ = !(s > 0.0);
  log_scale_ = zero_ ? 0.0 : std::log(s);
}

Eigen::MatrixXd AdaptiveProposal::proposal_covariance() const {
  const auto d = static_cast<Eigen::Index>(dim_);
  if (zero_) return Eigen::MatrixXd::Zero(d, d);
  if (count_ < settings_.warmup || count_ < 2) {
    const double v = settings_.initial_sd * settings_.initial_sd;
    return v * Eigen::MatrixXd::Identity(d, d) * (frozen_ ? scale() : 1.0);
  }
  Eigen::MatrixXd c = m2_ / static_cast<double>(count_ - 1);
  double eps = settings_.regularization * c.trace() / static_cast<double>(dim_);
  if (!(eps > 0.0)) eps = settings_.regularization;
  c.diagonal().array() += eps;
  return scale() * (2.38 * 2.38 / static_cast<double>(dim_)) * c;
}

std::vector<double> AdaptiveProposal::propose(std::span<const double> current, Rng& rng) const {
  if (current.size() != dim_) throw InputError("proposal dimension mismatch");
  const auto d = static_cast<Eigen::Index>(dim_);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = standard_normal(rng);
  std::vector<double> out(current.begin(), current.end());
  if (zero_) return out;

  Eigen::MatrixXd cov = proposal_covariance();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  double jitter = 1e-12;
  while (llt.info() != Eigen::Success) {
    cov.diagonal().array() += jitter;
    jitter *= 10.0;
    llt.compute(cov);
  }
  const Eigen::VectorXd step = llt.matrixL() * z;
  for (std::size_t i = 0; i < dim_; ++i) out[i] += step(static_cast<Eigen::Index>(i));
  return out;
}

void AdaptiveProposal::update(std::span<const double> state, double accept_prob) {
  const auto d = static_cast<Eigen::Index>(dim_);
  Eigen::VectorXd x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = state[static_cast<std::size_t>(i)];
  ++count_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_).transpose();

  if (!frozen_ && count_ > settings_.warmup) {
    const double step =
        std::pow(static_cast<double>(count_ - settings_.warmup), -settings_.decay);
    const double a = std::isfinite(accept_prob) ? std::clamp(accept_prob, 0.0, 1.0) : 0.0;
    log_scale_ += step * (a - settings_.target_accept);
  }
}

std::vector<double> Chain::trace(std::size_t k, bool include_burn_in) const {
  std::vector<double> out;
  const std::size_t start = include_burn_in ? 0 : std::min(burn_in, draws.size());
  out.reserve(draws.size() - start);
  for (std::size_t i = start; i < draws.size(); ++i) out.push_back(draws[i].at(k));
  return out;
}

double Chain::acceptance_rate() const {
  const std::size_t start = std::min(burn_in, accepted.size());
  if (accepted.size() == start) return 0.0;
  std::size_t n = 0;
  for (std::size_t i = start; i < accepted.size(); ++i) n += accepted[i] ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(accepted.size() - start);
}

Chain run_mh(const LogLikelihood& loglik, const Prior& prior, std::vector<double> theta0,
             const MhSettings& settings, std::vector<std::string> names) {
  if (settings.iterations == 0) throw InputError("MH needs at least one iteration");
  if (settings.burn_in >= settings.iterations)
    throw InputError("burn-in must be smaller than the number of iterations");
  if (theta0.size() != prior.size()) throw InputError("initial point does not match the prior");

  AdaptiveProposal proposal(theta0.size(), settings.proposal);
  if (settings.forced_scale) proposal.force_scale(*settings.forced_scale);
  Rng rng = make_stream(settings.seed, 0, kProposalSalt);

  LogTarget current{0.0, log_prior(prior, theta0)};
  if (!(current.logprior > kNegInf)) throw InputError("initial point lies outside the prior support");
  current.loglik = loglik(theta0, derive_seed(settings.seed, 0, kLikelihoodSalt));
  if (!(current.loglik > kNegInf) || std::isnan(current.loglik))
    throw NumericalError("log-likelihood at the initial point is not finite");

  Chain chain;
  chain.names = std::move(names);
  chain.burn_in = settings.burn_in;
  chain.draws.reserve(settings.iterations);
  chain.loglik.reserve(settings.iterations);
  chain.logprior.reserve(settings.iterations);
  chain.accepted.reserve(settings.iterations);

  std::vector<double> state = std::move(theta0);
  for (std::size_t i = 0; i < settings.iterations; ++i) {
    std::vector<double> cand = proposal.propose(state, rng);
    LogTarget c{kNegInf, log_prior(prior, cand)};
    if (c.logprior > kNegInf) {
      const auto t0 = std::chrono::steady_clock::now();
      c.loglik = loglik(cand, derive_seed(settings.seed, i + 1, kLikelihoodSalt));
      chain.likelihood_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    const double log_alpha = mh_accept_logratio(c, current);
    const double u = uniform01(rng);
    const bool accept = std::log(u) < log_alpha;
    if (accept) {
      state = std::move(cand);
      current = c;
    }
    chain.draws.push_back(state);
    chain.loglik.push_back(current.loglik);
    chain.logprior.push_back(current.logprior);
    chain.accepted.push_back(accept ? 1 : 0);
    proposal.update(state, std::exp(log_alpha));
  }
  return chain;
}

LogLikelihood filter_loglik(const FilterConfig& filter, ModelKind family, std::vector<double> y) {
  if (!supports(filter.kind, family))
    throw DomainError(filter.label() + " is not available for the " +
                      std::string(to_string(family)) + " model");
  return [filter, family, y = std::move(y)](std::span<const double> theta, std::uint64_t seed) {
    const auto model = model_from_theta(family, theta);
    if (!model) return kNegInf;
    return run_filter(filter, *model, y, seed).loglik;
  };
}

LogLikelihood kalman_loglik_fn(std::vector<double> y) {
  return [y = std::move(y)](std::span<const double> theta, std::uint64_t) {
    const auto model = model_from_theta(ModelKind::LG, theta);
    if (!model) return kNegInf;
    return kalman_loglik(std::get<LgParams>(model->params()), y);
  };
}

Chain run_pmmh(const FilterConfig& filter, ModelKind family, const Prior& prior,
               std::span<const double> y, std::vector<double> theta0,
               const MhSettings& settings) {
  if (filter.particles < 2) throw InputError("PMMH needs N >= 2 particles");
  Chain chain = run_mh(filter_loglik(filter, family, std::vector<double>(y.begin(), y.end())),
                       prior, std::move(theta0), settings, parameter_names(family));
  chain.filter_label = filter.label();
  chain.particles = filter.particles;
  return chain;
}

std::size_t nopt_from_variance(std::size_t n_s, double variance) {
  if (!(variance >= 0.0) || !std::isfinite(variance))
    throw NumericalError("log-likelihood variance is not finite");
  const double n = std::round(static_cast<double>(n_s) * variance / kTargetLogLikVariance);
  return n < 2.0 ? 2 : static_cast<std::size_t>(n);
}

NoptCalibration calibrate_nopt(const FilterConfig& filter, const Model& model,
                               std::span<const double> y, std::size_t n_s, std::size_t r0,
                               std::uint64_t seed) {
  if (r0 < 2) throw InputError("calibration needs R_0 >= 2 replications");
  FilterConfig cfg = filter;
  cfg.particles = n_s;
  std::vector<double> ll;
  ll.reserve(r0);
  NoptCalibration out;
  double seconds = 0.0;
  for (std::size_t r = 0; r < r0; ++r) {
    const FilterRun run = run_filter(cfg, model, y, derive_seed(seed, r));
    seconds += run.elapsed_seconds;
    if (run.degenerate || !std::isfinite(run.loglik)) {
      ++out.excluded;
      continue;
    }
    ll.push_back(run.loglik);
  }
  if (ll.size() < 2) throw NumericalError("calibration failed: fewer than two finite replications");
  out.replications = ll.size();
  out.loglik_variance = sample_variance(ll);
  out.n_opt = nopt_from_variance(n_s, out.loglik_variance);
  out.mean_seconds = seconds / static_cast<double>(r0);
  return out;
}

}  // namespace pmmhf
