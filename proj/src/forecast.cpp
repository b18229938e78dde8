#include "pmmhf/forecast.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>

#include "pmmhf/error.hpp"
#include "pmmhf/numeric.hpp"
#include "pmmhf/parallel.hpp"

namespace pmmhf {

namespace {

constexpr std::uint64_t kFilterSalt = 0x66696c746572ULL;
constexpr std::uint64_t kPredictSalt = 0x70726564ULL;
constexpr std::uint64_t kChainSalt = 0x636861696eULL;
constexpr std::uint64_t kPeriodSalt = 0x706572696f64ULL;

}  // namespace

double transformed_observable(ModelKind family, double y) {
  switch (family) {
    case ModelKind::LG: return y;
    case ModelKind::SCD:
      if (!(y > 0.0)) throw DataError("SCD observations must be positive");
      return std::log(y);
    case ModelKind::SV:
      if (y == 0.0) throw DataError("log y^2 is undefined at a zero return");
      return std::log(y * y);
  }
  return y;
}

std::vector<double> transformed_observables(ModelKind family, std::span<const double> y) {
  std::vector<double> z;
  z.reserve(y.size());
  for (double v : y) z.push_back(transformed_observable(family, v));
  return z;
}

double PredictiveDensity::mass() const {
  double s = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    s += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  return s;
}

std::vector<double> make_grid(std::span<const double> z_in_sample, const GridSettings& settings,
                              std::optional<double> realized) {
  if (z_in_sample.size() < 2) throw InputError("grid needs at least two in-sample values");
  if (settings.points < 2 || !(settings.width > 0.0)) throw InputError("invalid grid settings");
  const double m = mean(z_in_sample);
  double s = std::sqrt(sample_variance(z_in_sample));
  if (!(s > 0.0)) s = 1.0;
  double lo = m - settings.width * s;
  double hi = m + settings.width * s;
  if (realized) {
    if (!std::isfinite(*realized)) throw DataError("realized value is not finite");
    if (*realized <= lo) lo = *realized - s;
    if (*realized >= hi) hi = *realized + s;
  }
  std::vector<double> grid(settings.points);
  const double step = (hi - lo) / static_cast<double>(settings.points - 1);
  for (std::size_t i = 0; i < settings.points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

std::vector<double> predictive_mixture(const Model& model, std::span<const double> states,
                                       std::span<const double> weights,
                                       std::span<const double> grid) {
  if (states.empty()) throw InputError("empty particle cloud");
  if (states.size() != weights.size()) throw InputError("states and weights differ in length");
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (weights[j] == 0.0) continue;
    for (std::size_t g = 0; g < grid.size(); ++g)
      out[g] += weights[j] * std::exp(model.log_transformed_density(grid[g], states[j]));
  }
  return out;
}

std::vector<double> conditional_predictive(const ParticleCloud& cloud, const Model& model,
                                           std::span<const double> grid, Rng& rng) {
  if (cloud.size() == 0) throw InputError("empty particle cloud");
  std::vector<double> next(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j)
    next[j] = model.sample_transition(cloud.particles[j], rng);
  return predictive_mixture(model, next, cloud.weights, grid);
}

double log_score(const PredictiveDensity& pd) {
  const auto& g = pd.grid;
  const double r = pd.realized;
  if (g.size() < 2 || g.size() != pd.density.size())
    throw InputError("predictive density grid is malformed");
  if (!(r >= g.front() && r <= g.back()))
    throw NumericalError("realized value lies outside the forecast grid");
  auto it = std::upper_bound(g.begin(), g.end(), r);
  std::size_t i = it == g.end() ? g.size() - 1 : static_cast<std::size_t>(it - g.begin());
  if (i == 0) i = 1;
  const double t = (r - g[i - 1]) / (g[i] - g[i - 1]);
  const double d = (1.0 - t) * pd.density[i - 1] + t * pd.density[i];
  return d > 0.0 ? std::log(d) : kNegInf;
}

MarginalPredictive marginal_predictive(const Chain& chain, ModelKind family,
                                       std::span<const double> y, const FilterConfig& filter,
                                       std::vector<double> grid, std::uint64_t seed,
                                       std::optional<double> realized,
                                       const MarginalOptions& options) {
  if (options.thin == 0) throw InputError("thinning interval must be positive");
  if (chain.size() <= chain.burn_in) throw InputError("chain has no post-burn-in draws");

  MarginalPredictive out;
  std::vector<double> sum(grid.size(), 0.0);
  std::vector<double> last;
  const std::vector<double>* last_theta = nullptr;
  bool last_ok = false;

  for (std::size_t i = chain.burn_in; i < chain.size(); i += options.thin) {
    const std::vector<double>& theta = chain.draws[i];
    if (last_theta == nullptr || theta != *last_theta) {
      last_theta = &theta;
      last_ok = false;
      const auto model = model_from_theta(family, theta);
      if (model) {
        const FilterRun run = run_filter(filter, *model, y, derive_seed(seed, i, kFilterSalt));
        if (!run.degenerate) {
          Rng rng = make_stream(seed, i, kPredictSalt);
          last = conditional_predictive(run.final_cloud, *model, grid, rng);
          last_ok = true;
        }
      }
    }
    if (!last_ok) {
      ++out.excluded;
      continue;
    }
    for (std::size_t g = 0; g < grid.size(); ++g) sum[g] += last[g];
    if (options.keep_components) out.components.push_back(last);
    ++out.used;
  }
  if (out.used == 0) throw NumericalError("every draw gave a degenerate filter run");
  if (out.excluded > 0) spdlog::warn("{}: {} draws excluded as degenerate", filter.label(), out.excluded);

  for (double& v : sum) v /= static_cast<double>(out.used);
  out.density.grid = std::move(grid);
  out.density.density = std::move(sum);
  if (realized) {
    out.density.realized = *realized;
    out.density.log_score = log_score(out.density);
  }
  return out;
}

std::vector<double> initial_theta(ModelKind family, const Prior& prior,
                                  std::span<const double> y) {
  if (family == ModelKind::SV) {
    std::vector<double> z;
    for (double v : y)
      if (v != 0.0) z.push_back(std::log(v * v));
    if (z.size() >= 2) {
      const double rho = 0.9;
      const double eps_mean = boost::math::digamma(0.5) + std::numbers::ln2;
      const double mx = mean(z) - eps_mean;
      const double vz = sample_variance(z);
      const double vx = std::max(vz - std::numbers::pi * std::numbers::pi / 2.0, 0.1);
      return {mx * (1.0 - rho), rho, std::log(vx * (1.0 - rho * rho))};
    }
  }
  std::vector<double> theta;
  for (const PriorTerm& t : prior.terms)
    theta.push_back(t.law == PriorTerm::Law::Beta ? t.a / (t.a + t.b) : t.a);
  return theta;
}

void summarize(ForecastReport& report) {
  const FilterForecast* base = nullptr;
  for (const auto& f : report.filters)
    if (f.label == report.baseline) base = &f;
  for (auto& f : report.filters) {
    f.als = f.scores.empty() ? std::nan("") : mean(f.scores);
    if (base == nullptr || base->scores.size() != f.scores.size()) {
      f.adls = std::nan("");
      continue;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < f.scores.size(); ++k) s += std::abs(f.scores[k] - base->scores[k]);
    f.adls = f.scores.empty() ? std::nan("") : s / static_cast<double>(f.scores.size());
  }
}

ForecastReport rolling_forecast(std::span<const double> y, ModelKind family, const Prior& prior,
                                const std::vector<FilterConfig>& filters,
                                const ForecastSettings& settings) {
  if (filters.empty()) throw InputError("no filters to compare");
  if (settings.horizon == 0) throw InputError("forecast horizon must be at least 1");
  if (settings.refresh_every == 0) throw InputError("refresh interval must be at least 1");
  if (y.size() <= settings.horizon + 1) throw InputError("series too short for the horizon");
  for (const auto& f : filters)
    if (!supports(f.kind, family))
      throw ConfigError(f.label() + " is not available for the " + std::string(to_string(family)) +
                        " model");

  ForecastReport report;
  report.in_sample = y.size() - settings.horizon;
  const std::vector<double> z = transformed_observables(family, y);
  report.realized_z.assign(z.begin() + static_cast<std::ptrdiff_t>(report.in_sample), z.end());
  report.baseline = filters.front().label();
  for (const auto& f : filters)
    if (f.kind == FilterKind::BPF) {
      report.baseline = f.label();
      break;
    }
  report.filters.resize(filters.size());

  parallel_for(filters.size(), settings.jobs, [&](std::size_t fi) {
    const FilterConfig& filter = filters[fi];
    FilterForecast& out = report.filters[fi];
    out.label = filter.label();
    const std::uint64_t filter_seed = derive_seed(settings.seed, fi, kChainSalt);
    std::vector<double> theta =
        initial_theta(family, prior, y.first(report.in_sample));
    const Chain* chain = nullptr;

    for (std::size_t k = 0; k < settings.horizon; ++k) {
      const std::size_t t = report.in_sample + k;
      const auto window = y.first(t);
      if (k % settings.refresh_every == 0) {
        MhSettings ms;
        ms.iterations = settings.mh_iterations;
        ms.burn_in = settings.burn_in;
        ms.seed = derive_seed(filter_seed, k);
        ms.proposal = settings.proposal;
        out.chains.push_back(run_pmmh(filter, family, prior, window, theta, ms));
        chain = &out.chains.back();
        theta = chain->draws.back();
        spdlog::info("{}: chain refreshed at period {} (acceptance {:.3f})", out.label, k + 1,
                     chain->acceptance_rate());
      }
      std::vector<double> grid =
          make_grid(std::span<const double>(z).first(t), settings.grid, z[t]);
      MarginalOptions mo;
      mo.thin = settings.thin;
      MarginalPredictive mp =
          marginal_predictive(*chain, family, window, filter, std::move(grid),
                              derive_seed(filter_seed, k, kPeriodSalt), z[t], mo);
      out.excluded += mp.excluded;
      out.scores.push_back(mp.density.log_score);
      out.densities.push_back(std::move(mp.density));
    }
  });

  summarize(report);
  return report;
}

}  // namespace pmmhf
