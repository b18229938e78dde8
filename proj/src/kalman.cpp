#include "pmmhf/kalman.hpp"

#include <cmath>

#include "pmmhf/error.hpp"
#include "pmmhf/numeric.hpp"

namespace pmmhf {

std::vector<KalmanState> kalman_filter(const LgParams& params, std::span<const double> y) {
  if (y.empty()) throw InputError("kalman filter needs at least one observation");
  const Model model(params);  // validates
  const double q = params.sigma_v * params.sigma_v;
  const double r = params.sigma_eta * params.sigma_eta;

  std::vector<KalmanState> out;
  out.reserve(y.size());
  KalmanState s{0.0, model.stationary_variance(), 0.0};
  for (double obs : y) {
    if (!std::isfinite(obs)) throw InputError("kalman filter received a non-finite observation");
    const double m_pred = params.rho * s.mean;
    const double p_pred = params.rho * params.rho * s.variance + q;
    const double innov_var = p_pred + r;
    const double innov = obs - m_pred;
    s.loglik += normal_log_pdf(obs, m_pred, innov_var);
    const double gain = p_pred / innov_var;
    s.mean = m_pred + gain * innov;
    s.variance = p_pred * r / innov_var;  // (1 - gain) p_pred, never negative
    out.push_back(s);
  }
  return out;
}

double kalman_loglik(const LgParams& params, std::span<const double> y) {
  return kalman_filter(params, y).back().loglik;
}

}  // namespace pmmhf
