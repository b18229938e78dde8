#include "pmmhf/diagnostics.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "pmmhf/error.hpp"
#include "pmmhf/numeric.hpp"

namespace pmmhf {

namespace {

// Autocovariances at lags 0..max_lag around the sample mean, divided by n.
std::vector<double> autocovariances(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  const double m = mean(x);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - m;
  max_lag = std::min(max_lag, n - 1);
  std::vector<double> g(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += d[i] * d[i + k];
    g[k] = s / static_cast<double>(n);
  }
  return g;
}

}  // namespace

std::vector<double> autocorrelations(std::span<const double> series, std::size_t max_lag) {
  if (series.size() < 2) throw InputError("autocorrelations need at least two values");
  std::vector<double> g = autocovariances(series, max_lag);
  if (!(g[0] > 0.0)) {
    std::vector<double> r(g.size(), 0.0);
    r[0] = 1.0;
    return r;
  }
  const double g0 = g[0];
  for (double& v : g) v /= g0;
  return g;
}

double inefficiency_factor(std::span<const double> series, IfEstimator estimator) {
  const std::size_t n = series.size();
  if (n < 100) throw InputError("inefficiency factor needs at least 100 draws");
  for (double v : series)
    if (!std::isfinite(v)) throw InputError("inefficiency factor got a non-finite draw");

  const double m = mean(series);
  double ss = 0.0;
  for (double v : series) ss += (v - m) * (v - m);
  if (!(ss > 0.0)) {
    spdlog::warn("inefficiency factor of a constant series; returning 1");
    return 1.0;
  }

  if (estimator == IfEstimator::Bandwidth) {
    const auto b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    const std::vector<double> r = autocorrelations(series, b);
    double s = 1.0;
    for (std::size_t k = 1; k < r.size(); ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(b);
      const double w = u <= 0.5 ? 1.0 - 6.0 * u * u + 6.0 * u * u * u
                                : 2.0 * (1.0 - u) * (1.0 - u) * (1.0 - u);
      s += 2.0 * w * r[k];
    }
    return std::max(s, 0.0);
  }

  // Pairs Gamma_m = r_{2m} + r_{2m+1} are summed while positive; the lag
  // window grows in chunks so short-memory chains stay cheap.
  std::size_t max_lag = std::min<std::size_t>(n - 1, 256);
  for (;;) {
    const std::vector<double> r = autocorrelations(series, max_lag);
    double total = -1.0;  // r_0 is counted twice by 2 * sum Gamma_m
    bool closed = false;
    for (std::size_t k = 0; k + 1 < r.size(); k += 2) {
      const double pair = r[k] + r[k + 1];
      if (!(pair > 0.0)) {
        closed = true;
        break;
      }
      total += 2.0 * pair;
    }
    if (closed || max_lag >= n - 1) return std::max(total, 0.0);
    max_lag = std::min(n - 1, max_lag * 4);
  }
}

double alct(std::span<const double> timings) {
  if (timings.empty()) throw InputError("no likelihood timings recorded");
  return mean(timings);
}

double alct(const Chain& chain) { return alct(chain.likelihood_seconds); }

Diagnostics diagnose(const Chain& chain, IfEstimator estimator) {
  if (chain.size() == 0) throw InputError("empty chain");
  Diagnostics d;
  d.names = chain.names;
  const std::size_t dim = chain.draws.front().size();
  for (std::size_t k = 0; k < dim; ++k) {
    const std::vector<double> tr = chain.trace(k);
    d.posterior_mean.push_back(tr.empty() ? std::nan("") : mean(tr));
    d.posterior_sd.push_back(tr.size() < 2 ? std::nan("") : std::sqrt(sample_variance(tr)));
    d.inefficiency.push_back(tr.size() >= 100 ? inefficiency_factor(tr, estimator)
                                              : std::nan(""));
  }
  d.alct = chain.likelihood_seconds.empty() ? 0.0 : alct(chain);
  d.acceptance_rate = chain.acceptance_rate();
  d.n_opt = chain.particles;
  return d;
}

}  // namespace pmmhf
