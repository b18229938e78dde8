#ifndef PMMHF_NUMERIC_HPP
#define PMMHF_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace pmmhf {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

inline double normal_log_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance) + d * d / variance);
}

/// log(sum(exp(v))); -inf for an empty span or when every entry is -inf.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Turns log weights into normalized weights in place of `out` and returns
/// the log of the unnormalized sum. Returns -inf (and leaves `out` zeroed)
/// if all weights vanish; NaN entries count as zero weight.
inline double normalize_log_weights(std::span<const double> log_w,
                                    std::vector<double>& out) {
  out.assign(log_w.size(), 0.0);
  double m = kNegInf;
  for (double x : log_w)
    if (x > m) m = x;
  if (!(m > kNegInf) || std::isinf(m)) {
    // +inf cannot be normalized either
    return m == std::numeric_limits<double>::infinity() ? std::nan("") : kNegInf;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    const double e = std::isnan(log_w[i]) ? 0.0 : std::exp(log_w[i] - m);
    out[i] = e;
    s += e;
  }
  for (double& x : out) x /= s;
  return m + std::log(s);
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double sample_variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace pmmhf

#endif
