#ifndef PMMHF_UNSCENTED_HPP
#define PMMHF_UNSCENTED_HPP

#include <functional>
#include <span>
#include <vector>

#include "pmmhf/error_law.hpp"
#include "pmmhf/models.hpp"

namespace pmmhf {

/// Weighted sigma points whose first M-1 central moments equal those of
/// `law`. Immutable once built.
struct SigmaPointSet {
  ErrorLaw law;
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

struct GaussianMoments {
  double mean = 0.0;
  double variance = 1.0;
};

/// 3 for normal laws, 5 for the skewed ones.
int default_sigma_size(const ErrorLaw& law);

/// Points at the M Gauss nodes of `law` (eigenvalues of the Jacobi matrix
/// built from its Hankel moment matrix), weights from the moment system.
/// For N(0,1) and M = 3 this is {-sqrt 3, 0, sqrt 3} with {1/6, 2/3, 1/6}.
SigmaPointSet build_sigma_points(const ErrorLaw& law, int M);

/// Weights for caller-chosen points. Throws NumericalError when the moment
/// system is singular (coincident points).
SigmaPointSet sigma_points_at(const ErrorLaw& law, std::span<const double> points);

/// Jacobian-weighted mean and variance of x(y, eta_k) over the sigma set.
/// Throws DomainError if any point cannot be inverted at y, NumericalError
/// if the variance is not positive even after the positive-weight fallback.
GaussianMoments unscented_measurement_moments(const Model& model, double y,
                                              const SigmaPointSet& sigma);

/// Product of two Gaussian kernels in x, renormalized.
GaussianMoments conjugate_combine(const GaussianMoments& prior,
                                  const GaussianMoments& likelihood);

/// Scaled symmetric unscented transform of (x, e) ~ N(prior) x N(error)
/// through z = f(x, e), followed by linear-Gaussian conditioning on
/// z = observed. Returns the conditioned moments of x.
struct UnscentedScaling {
  double alpha = 1.0;
  double beta = 0.0;
  double kappa = 1.0;  // 3 - n for the 2-dimensional augmented state
};

GaussianMoments unscented_condition(const GaussianMoments& prior, const GaussianMoments& error,
                                    double observed,
                                    const std::function<double(double, double)>& f,
                                    const UnscentedScaling& scaling = {});

}  // namespace pmmhf

#endif
