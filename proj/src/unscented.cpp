#include "pmmhf/unscented.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

#include "pmmhf/error.hpp"

namespace pmmhf {

int default_sigma_size(const ErrorLaw& law) {
  return law.kind() == ErrorLaw::Kind::Normal ? 3 : 5;
}

SigmaPointSet sigma_points_at(const ErrorLaw& law, std::span<const double> points) {
  const auto m = static_cast<Eigen::Index>(points.size());
  if (m < 2) throw InputError("sigma point set needs at least 2 points");
  const double mu = law.mean();
  const double sd = std::sqrt(law.variance());

  // Standardize before building the Vandermonde system.
  Eigen::MatrixXd a(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    rhs(k) = law.central_moment(static_cast<int>(k)) / std::pow(sd, static_cast<double>(k));
    for (Eigen::Index j = 0; j < m; ++j)
      a(k, j) = std::pow((points[static_cast<std::size_t>(j)] - mu) / sd, static_cast<double>(k));
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw NumericalError("sigma point moment system is singular");
  const Eigen::VectorXd w = lu.solve(rhs);

  SigmaPointSet out{law, std::vector<double>(points.begin(), points.end()),
                    std::vector<double>(w.data(), w.data() + m)};
  return out;
}

SigmaPointSet build_sigma_points(const ErrorLaw& law, int M) {
  if (M < 2) throw InputError("sigma point set needs M >= 2");
  const double mu = law.mean();
  const double sd = std::sqrt(law.variance());

  // Hankel matrix of standardized moments 0..2M, Cholesky, then the
  // three-term recurrence of the orthogonal polynomials.
  Eigen::MatrixXd h(M + 1, M + 1);
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= M; ++j)
      h(i, j) = law.central_moment(i + j) / std::pow(sd, i + j);
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) throw NumericalError("moment matrix is not positive definite");
  const Eigen::MatrixXd r = llt.matrixU();

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(M, M);
  for (int j = 0; j < M; ++j) {
    jacobi(j, j) = r(j, j + 1) / r(j, j) - (j > 0 ? r(j - 1, j) / r(j - 1, j - 1) : 0.0);
    if (j + 1 < M) {
      jacobi(j, j + 1) = r(j + 1, j + 1) / r(j, j);
      jacobi(j + 1, j) = jacobi(j, j + 1);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  std::vector<double> points(static_cast<std::size_t>(M));
  for (int k = 0; k < M; ++k) {
    double u = eig.eigenvalues()(k);
    if (std::abs(u) < 1e-14) u = 0.0;
    points[static_cast<std::size_t>(k)] = mu + sd * u;
  }
  return sigma_points_at(law, points);
}

GaussianMoments unscented_measurement_moments(const Model& model, double y,
                                              const SigmaPointSet& sigma) {
  const std::size_t m = sigma.size();
  std::vector<double> xs(m), mass(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Inversion inv = model.invert_measurement(y, sigma.points[k]);
    xs[k] = inv.x;
    mass[k] = sigma.weights[k] * inv.jac_inv;
  }

  auto moments = [&](const std::vector<double>& w) {
    double total = 0.0, m1 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      total += w[k];
      m1 += w[k] * xs[k];
    }
    const double mean = m1 / total;
    double v = 0.0;
    for (std::size_t k = 0; k < m; ++k) v += w[k] * (xs[k] - mean) * (xs[k] - mean);
    return GaussianMoments{mean, v / total};
  };

  GaussianMoments g = moments(mass);
  if (!(g.variance > 0.0) || !std::isfinite(g.mean)) {
    spdlog::debug("unscented variance {} not positive; retrying with positive weights", g.variance);
    std::vector<double> pos(m);
    for (std::size_t k = 0; k < m; ++k) pos[k] = std::max(mass[k], 0.0);
    g = moments(pos);
    if (!(g.variance > 0.0) || !std::isfinite(g.mean))
      throw NumericalError("degenerate unscented measurement moments");
  }
  return g;
}

GaussianMoments conjugate_combine(const GaussianMoments& prior,
                                  const GaussianMoments& likelihood) {
  if (!(prior.variance > 0.0) || !(likelihood.variance > 0.0))
    throw DomainError("conjugate_combine needs positive variances");
  const double sp = prior.variance;
  const double sm = likelihood.variance;
  const double denom = sp + sm;
  return {(sp * likelihood.mean + sm * prior.mean) / denom, sm * sp / denom};
}

GaussianMoments unscented_condition(const GaussianMoments& prior, const GaussianMoments& error,
                                    double observed,
                                    const std::function<double(double, double)>& f,
                                    const UnscentedScaling& scaling) {
  constexpr double n = 2.0;
  const double lambda = scaling.alpha * scaling.alpha * (n + scaling.kappa) - n;
  const double spread = std::sqrt(n + lambda);
  const double wm0 = lambda / (n + lambda);
  const double wc0 = wm0 + (1.0 - scaling.alpha * scaling.alpha + scaling.beta);
  const double wi = 1.0 / (2.0 * (n + lambda));

  const double sx = spread * std::sqrt(prior.variance);
  const double se = spread * std::sqrt(error.variance);
  const double px[5] = {prior.mean, prior.mean + sx, prior.mean - sx, prior.mean, prior.mean};
  const double pe[5] = {error.mean, error.mean, error.mean, error.mean + se, error.mean - se};
  const double wm[5] = {wm0, wi, wi, wi, wi};
  const double wc[5] = {wc0, wi, wi, wi, wi};

  double z[5];
  double z_hat = 0.0;
  for (int k = 0; k < 5; ++k) {
    z[k] = f(px[k], pe[k]);
    z_hat += wm[k] * z[k];
  }
  double pzz = 0.0, pxz = 0.0;
  for (int k = 0; k < 5; ++k) {
    pzz += wc[k] * (z[k] - z_hat) * (z[k] - z_hat);
    pxz += wc[k] * (px[k] - prior.mean) * (z[k] - z_hat);
  }
  if (!(pzz > 0.0)) throw NumericalError("unscented predicted measurement variance not positive");
  const double gain = pxz / pzz;
  const GaussianMoments out{prior.mean + gain * (observed - z_hat),
                            prior.variance - gain * gain * pzz};
  if (!(out.variance > 0.0)) throw NumericalError("unscented conditioned variance not positive");
  return out;
}

}  // namespace pmmhf
