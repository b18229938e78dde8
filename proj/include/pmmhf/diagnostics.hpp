#ifndef PMMHF_DIAGNOSTICS_HPP
#define PMMHF_DIAGNOSTICS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pmmhf/pmmh.hpp"

namespace pmmhf {

enum class IfEstimator {
  InitialPositiveSequence,  // Geyer: sum pairs of autocorrelations while positive
  Bandwidth,                // Parzen-window sum up to B = floor(sqrt(n))
};

/// Sample autocorrelations at lags 0..max_lag (FFT-free, O(n * max_lag)).
std::vector<double> autocorrelations(std::span<const double> series, std::size_t max_lag);

/// 1 + 2 sum_k rho_k. Requires at least 100 values; a constant series gives 1.
double inefficiency_factor(std::span<const double> series,
                           IfEstimator estimator = IfEstimator::InitialPositiveSequence);

/// Mean seconds per timed likelihood evaluation; InputError if none recorded.
double alct(std::span<const double> timings);
double alct(const Chain& chain);

struct Diagnostics {
  std::vector<std::string> names;
  std::vector<double> inefficiency;  // per parameter, post burn-in
  std::vector<double> posterior_mean;
  std::vector<double> posterior_sd;
  double alct = 0.0;
  double acceptance_rate = 0.0;
  std::size_t n_opt = 0;
};

Diagnostics diagnose(const Chain& chain,
                     IfEstimator estimator = IfEstimator::InitialPositiveSequence);

}  // namespace pmmhf

#endif
