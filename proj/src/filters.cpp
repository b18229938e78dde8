#include "pmmhf/filters.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "pmmhf/error.hpp"
#include "pmmhf/numeric.hpp"

namespace pmmhf {

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::BPF: return "BPF";
    case FilterKind::FAPF: return "FAPF";
    case FilterKind::UPF: return "UPF";
    case FilterKind::DPF: return "DPF";
    case FilterKind::UDPF: return "UDPF";
  }
  return "?";
}

FilterKind parse_filter_kind(std::string_view name) {
  if (name == "BPF") return FilterKind::BPF;
  if (name == "FAPF") return FilterKind::FAPF;
  if (name == "UPF") return FilterKind::UPF;
  if (name == "DPF") return FilterKind::DPF;
  if (name == "UDPF") return FilterKind::UDPF;
  throw InputError("unknown filter '" + std::string(name) + "'");
}

bool supports(FilterKind filter, ModelKind model) {
  return filter != FilterKind::FAPF || model == ModelKind::LG;
}

ParticleCloud ParticleCloud::uniform(std::vector<double> particles, std::size_t t) {
  const std::size_t n = particles.size();
  ParticleCloud c;
  c.particles = std::move(particles);
  c.weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  c.t = t;
  return c;
}

MatchPlan::MatchPlan(std::size_t n, std::size_t l) : n_(n), l_(l) {
  if (n == 0) throw DomainError("match plan needs N >= 1");
  if (l < 1 || l > n) throw DomainError("number of matches must satisfy 1 <= L <= N");
}

std::vector<std::size_t> MatchPlan::permutation(std::size_t l) const {
  std::vector<std::size_t> k(n_);
  for (std::size_t j = 0; j < n_; ++j) k[j] = index(l, j);
  return k;
}

MatchPlan cyclic_permutations(std::size_t N, std::size_t L) { return MatchPlan(N, L); }

std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t n,
                                          Rng& rng, ResamplingScheme scheme) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegeneracyError("cannot resample: weights sum to zero");

  std::vector<std::size_t> idx(n);
  const std::size_t m = weights.size();
  if (scheme == ResamplingScheme::Multinomial) {
    // Sorted uniforms from normalized exponential spacings, then one pass
    // over the cumulative weights.
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> u(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += expo(rng);
      u[i] = acc;
    }
    const double scale = total / (acc + expo(rng));
    std::size_t k = 0;
    double cum = weights[0];
    for (std::size_t i = 0; i < n; ++i) {
      const double target = u[i] * scale;
      while (cum < target && k + 1 < m) cum += weights[++k];
      idx[i] = k;
    }
  } else {
    const double step = total / static_cast<double>(n);
    double target = uniform01(rng) * step;
    std::size_t k = 0;
    double cum = weights[0];
    for (std::size_t i = 0; i < n; ++i) {
      while (cum < target && k + 1 < m) cum += weights[++k];
      idx[i] = k;
      target += step;
    }
  }
  return idx;
}

ParticleCloud resample(const ParticleCloud& cloud, Rng& rng, ResamplingScheme scheme) {
  const std::size_t n = cloud.size();
  const auto idx = resample_indices(cloud.weights, n, rng, scheme);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = cloud.particles[idx[i]];
  return ParticleCloud::uniform(std::move(x), cloud.t);
}

namespace {

void require_cloud(const ParticleCloud& cloud) {
  if (cloud.size() == 0 || cloud.weights.size() != cloud.size())
    throw InputError("particle cloud is empty or inconsistent");
}

StepResult finish(std::vector<double> particles, const std::vector<double>& log_w,
                  std::size_t t) {
  StepResult out;
  out.cloud.particles = std::move(particles);
  out.cloud.t = t;
  out.log_increment = normalize_log_weights(log_w, out.cloud.weights);
  if (std::isnan(out.log_increment)) out.log_increment = kNegInf;
  return out;
}

double safe_log(double w) { return w > 0.0 ? std::log(w) : kNegInf; }

}  // namespace

StepResult bpf_step(const ParticleCloud& cloud, const Model& model, double y_next, Rng& rng) {
  require_cloud(cloud);
  const std::size_t n = cloud.size();
  const bool flat = std::all_of(cloud.weights.begin(), cloud.weights.end(),
                                [&](double w) { return w == cloud.weights[0]; });
  const double flat_log = safe_log(cloud.weights[0]);
  std::vector<double> x(n), log_w(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = model.sample_transition(cloud.particles[j], rng);
    log_w[j] = (flat ? flat_log : safe_log(cloud.weights[j])) +
               model.log_measurement_density(x[j], y_next);
  }
  return finish(std::move(x), log_w, cloud.t + 1);
}

StepResult dpf_step(const ParticleCloud& cloud, const Model& model, double y_next,
                    const MatchPlan& plan, Rng& rng) {
  require_cloud(cloud);
  const std::size_t n = cloud.size();
  if (plan.particles() != n) throw DomainError("match plan size differs from particle count");
  if (!model.invertible(y_next))
    throw DomainError("observation " + std::to_string(y_next) +
                      " is outside the invertible domain of the measurement equation");

  const std::size_t L = plan.matches();
  const double log_l = std::log(static_cast<double>(L));
  std::vector<double> log_pi(n);
  for (std::size_t i = 0; i < n; ++i) log_pi[i] = safe_log(cloud.weights[i]);

  std::vector<double> x(n), log_w(n), terms(L);
  const ErrorLaw& q = model.inversion_law();
  for (std::size_t j = 0; j < n; ++j) {
    const Inversion inv = model.invert_measurement(y_next, q.sample(rng));
    x[j] = inv.x;
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t k = plan.index(l, j);
      terms[l] = log_pi[k] + model.log_transition_density(cloud.particles[k], inv.x);
    }
    const double matched = L == 1 ? terms[0] : log_sum_exp(terms) - log_l;
    log_w[j] = std::log(inv.jac_inv) + model.log_inversion_ratio() + matched;
  }
  return finish(std::move(x), log_w, cloud.t + 1);
}

StepResult udpf_step(const ParticleCloud& cloud, const Model& model, double y_next,
                     const SigmaPointSet& sigma, Rng& rng) {
  require_cloud(cloud);
  const std::size_t n = cloud.size();
  const GaussianMoments meas = unscented_measurement_moments(model, y_next, sigma);

  std::vector<double> x(n), log_w(n);
  const double prior_var = model.transition_variance();
  for (std::size_t j = 0; j < n; ++j) {
    const double x_prev = cloud.particles[j];
    const GaussianMoments prop =
        conjugate_combine({model.transition_mean(x_prev), prior_var}, meas);
    const double xn = prop.mean + std::sqrt(prop.variance) * standard_normal(rng);
    x[j] = xn;
    log_w[j] = safe_log(cloud.weights[j]) + model.log_measurement_density(xn, y_next) +
               model.log_transition_density(x_prev, xn) -
               normal_log_pdf(xn, prop.mean, prop.variance);
  }
  return finish(std::move(x), log_w, cloud.t + 1);
}

GaussianMoments upf_proposal_moments(const Model& model, double x_prev, double y_next) {
  const GaussianMoments prior{model.transition_mean(x_prev), model.transition_variance()};
  const double z = model.transform_observation(y_next);
  if (!std::isfinite(z)) return prior;
  const GaussianMoments err{model.transformed_error_mean(), model.transformed_error_variance()};
  return unscented_condition(prior, err, z, [](double x, double e) { return x + e; });
}

StepResult upf_step(const ParticleCloud& cloud, const Model& model, double y_next, Rng& rng) {
  require_cloud(cloud);
  const std::size_t n = cloud.size();
  const double z = model.transform_observation(y_next);
  const GaussianMoments err{model.transformed_error_mean(), model.transformed_error_variance()};
  const double prior_var = model.transition_variance();
  const auto additive = [](double x, double e) { return x + e; };

  std::vector<double> x(n), log_w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x_prev = cloud.particles[j];
    const GaussianMoments prior{model.transition_mean(x_prev), prior_var};
    const GaussianMoments prop =
        std::isfinite(z) ? unscented_condition(prior, err, z, additive) : prior;
    const double xn = prop.mean + std::sqrt(prop.variance) * standard_normal(rng);
    x[j] = xn;
    log_w[j] = safe_log(cloud.weights[j]) + model.log_measurement_density(xn, y_next) +
               model.log_transition_density(x_prev, xn) -
               normal_log_pdf(xn, prop.mean, prop.variance);
  }
  return finish(std::move(x), log_w, cloud.t + 1);
}

StepResult fapf_step(const ParticleCloud& cloud, const Model& model, double y_next, Rng& rng) {
  require_cloud(cloud);
  if (model.kind() != ModelKind::LG) throw DomainError("FAPF supports the LG model only");
  const auto& p = std::get<LgParams>(model.params());
  const std::size_t n = cloud.size();
  const double q = p.sigma_v * p.sigma_v;
  const double r = p.sigma_eta * p.sigma_eta;
  const double pred_var = q + r;

  // First stage: p(y_{t+1} | x_t) in closed form.
  std::vector<double> log_a(n), a;
  for (std::size_t k = 0; k < n; ++k)
    log_a[k] = safe_log(cloud.weights[k]) +
               normal_log_pdf(y_next, p.rho * cloud.particles[k], pred_var);
  StepResult out;
  out.log_increment = normalize_log_weights(log_a, a);
  out.resampled = true;
  out.cloud.t = cloud.t + 1;
  if (!(out.log_increment > kNegInf) || std::isnan(out.log_increment)) {
    out.log_increment = kNegInf;
    out.cloud.particles = cloud.particles;
    out.cloud.weights.assign(n, 0.0);
    return out;
  }

  // Second stage: exact p(x_{t+1} | x_t^{[k]}, y_{t+1}).
  const auto idx = resample_indices(a, n, rng);
  const double post_var = q * r / pred_var;
  const double post_sd = std::sqrt(post_var);
  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double prior_mean = p.rho * cloud.particles[idx[j]];
    const double post_mean = (r * prior_mean + q * y_next) / pred_var;
    x[j] = post_mean + post_sd * standard_normal(rng);
  }
  out.cloud = ParticleCloud::uniform(std::move(x), cloud.t + 1);
  return out;
}

std::string FilterConfig::label() const {
  std::string s(to_string(kind));
  if (kind == FilterKind::DPF) s += "(L=" + std::to_string(options.matches) + ")";
  return s;
}

FilterRun run_filter(FilterKind kind, const Model& model, std::span<const double> y,
                     std::size_t N, const FilterOptions& options, std::uint64_t seed) {
  if (N == 0) throw InputError("filter needs N >= 1");
  if (y.empty()) throw InputError("filter needs at least one observation");
  if (!supports(kind, model.kind()))
    throw DomainError(std::string(to_string(kind)) + " is not available for the " +
                      std::string(to_string(model.kind())) + " model");

  const auto start = std::chrono::steady_clock::now();
  Rng rng = make_stream(seed);

  std::vector<MatchPlan> plan;
  if (kind == FilterKind::DPF) plan.push_back(cyclic_permutations(N, options.matches));
  std::vector<SigmaPointSet> sigma;
  if (kind == FilterKind::UDPF) {
    const ErrorLaw& law = model.inversion_law();
    sigma.push_back(build_sigma_points(
        law, options.sigma_size > 0 ? options.sigma_size : default_sigma_size(law)));
  }

  std::vector<double> x0(N);
  for (double& x : x0) x = model.sample_initial(rng);
  ParticleCloud cloud = ParticleCloud::uniform(std::move(x0), 0);

  FilterRun run;
  run.increments.reserve(y.size());
  for (double obs : y) {
    StepResult step;
    try {
      switch (kind) {
        case FilterKind::BPF: step = bpf_step(cloud, model, obs, rng); break;
        case FilterKind::FAPF: step = fapf_step(cloud, model, obs, rng); break;
        case FilterKind::UPF: step = upf_step(cloud, model, obs, rng); break;
        case FilterKind::DPF: step = dpf_step(cloud, model, obs, plan.front(), rng); break;
        case FilterKind::UDPF: step = udpf_step(cloud, model, obs, sigma.front(), rng); break;
      }
    } catch (const NumericalError&) {
      step.log_increment = kNegInf;
    }
    if (!(step.log_increment > kNegInf) || !std::isfinite(step.log_increment)) {
      run.increments.push_back(kNegInf);
      run.degenerate = true;
      break;
    }
    run.increments.push_back(step.log_increment);
    cloud = step.resampled ? std::move(step.cloud)
                           : resample(step.cloud, rng, options.resampling);
  }

  run.loglik = 0.0;
  for (double inc : run.increments) run.loglik += inc;
  if (run.degenerate) run.loglik = kNegInf;
  run.final_cloud = std::move(cloud);
  run.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

FilterRun run_filter(const FilterConfig& config, const Model& model, std::span<const double> y,
                     std::uint64_t seed) {
  return run_filter(config.kind, model, y, config.particles, config.options, seed);
}

}  // namespace pmmhf
