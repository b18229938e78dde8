#ifndef PMMHF_KALMAN_HPP
#define PMMHF_KALMAN_HPP

#include <span>
#include <vector>

#include "pmmhf/models.hpp"

namespace pmmhf {

struct KalmanState {
  double mean = 0.0;      // E[x_t | y_{1:t}]
  double variance = 0.0;  // var[x_t | y_{1:t}]
  double loglik = 0.0;    // log p(y_{1:t})
};

/// Filtered moments after each observation, starting from the stationary
/// prior x_0 ~ N(0, sigma_v^2 / (1 - rho^2)). Element t-1 holds the state
/// after y_t. Throws InputError on non-finite observations.
std::vector<KalmanState> kalman_filter(const LgParams& params, std::span<const double> y);

/// Exact log p(y_{1:T}) for the LG model.
double kalman_loglik(const LgParams& params, std::span<const double> y);

}  // namespace pmmhf

#endif
