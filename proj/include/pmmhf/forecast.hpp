#ifndef PMMHF_FORECAST_HPP
#define PMMHF_FORECAST_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmmhf/filters.hpp"
#include "pmmhf/models.hpp"
#include "pmmhf/pmmh.hpp"

namespace pmmhf {

/// z = y (LG), log y (SCD), log y^2 (SV).
double transformed_observable(ModelKind family, double y);
std::vector<double> transformed_observables(ModelKind family, std::span<const double> y);

struct PredictiveDensity {
  std::vector<double> grid;
  std::vector<double> density;
  double realized = std::numeric_limits<double>::quiet_NaN();
  double log_score = std::numeric_limits<double>::quiet_NaN();

  /// Trapezoid integral over the grid.
  double mass() const;
};

struct GridSettings {
  std::size_t points = 400;
  double width = 8.0;  // half-width in in-sample standard deviations
};

/// Equally spaced grid over [m - width*s, m + width*s] of the in-sample z;
/// widened when needed so that `realized` lies strictly inside.
std::vector<double> make_grid(std::span<const double> z_in_sample, const GridSettings& settings,
                              std::optional<double> realized = std::nullopt);

/// sum_j w_j p_z(z | x_j) at every grid point.
std::vector<double> predictive_mixture(const Model& model, std::span<const double> states,
                                       std::span<const double> weights,
                                       std::span<const double> grid);

/// One transition draw per particle from the filtered cloud, then the
/// weighted mixture of p_z. InputError on an empty cloud.
std::vector<double> conditional_predictive(const ParticleCloud& cloud, const Model& model,
                                           std::span<const double> grid, Rng& rng);

/// log density at pd.realized by linear interpolation; NumericalError when
/// the realized value is outside the grid.
double log_score(const PredictiveDensity& pd);

struct MarginalPredictive {
  PredictiveDensity density;
  std::size_t used = 0;      // theta draws averaged
  std::size_t excluded = 0;  // degenerate filter runs
  std::vector<std::vector<double>> components;  // filled when requested
};

struct MarginalOptions {
  std::size_t thin = 5;
  bool keep_components = false;
};

/// Averages conditional predictives over every `thin`-th post-burn-in draw.
/// Each draw runs the filter on y with a stream derived from `seed` and the
/// draw index; a run of identical consecutive draws reuses the conditional
/// computed for the first of them.
MarginalPredictive marginal_predictive(const Chain& chain, ModelKind family,
                                       std::span<const double> y, const FilterConfig& filter,
                                       std::vector<double> grid, std::uint64_t seed,
                                       std::optional<double> realized = std::nullopt,
                                       const MarginalOptions& options = {});

/// Moment-based starting point for the chain: SV matches the mean and
/// variance of log y^2, other families start at the prior mean.
std::vector<double> initial_theta(ModelKind family, const Prior& prior,
                                  std::span<const double> y);

struct ForecastSettings {
  std::size_t horizon = 50;        // H
  std::size_t refresh_every = 50;  // chain re-estimated every this many periods
  std::size_t mh_iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 5;
  GridSettings grid;
  AdaptiveProposal::Settings proposal;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct FilterForecast {
  std::string label;
  std::vector<double> scores;  // one per period
  double als = 0.0;
  double adls = 0.0;
  std::vector<PredictiveDensity> densities;
  std::size_t excluded = 0;
  std::vector<Chain> chains;  // one per refresh
};

struct ForecastReport {
  std::size_t in_sample = 0;  // T
  std::vector<double> realized_z;
  std::string baseline;
  std::vector<FilterForecast> filters;
};

/// Expanding-window one-step forecasts of y[T], ..., y[T+H-1] where
/// T = y.size() - H. The baseline for ADLS is the BPF when present, else the
/// first filter.
ForecastReport rolling_forecast(std::span<const double> y, ModelKind family, const Prior& prior,
                                const std::vector<FilterConfig>& filters,
                                const ForecastSettings& settings);

/// Fills als and adls from the stored scores.
void summarize(ForecastReport& report);

}  // namespace pmmhf

#endif
