#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "pmmhf/diagnostics.hpp"
#include "pmmhf/error.hpp"
#include "pmmhf/kalman.hpp"
#include "pmmhf/numeric.hpp"
#include "pmmhf/pmmh.hpp"

using namespace pmmhf;

TEST_CASE("theta maps to models and back") {
  const Model lg(LgParams{0.45, 0.4, 0.92});
  const auto th = theta_from_model(lg);
  CHECK(th[0] == doctest::Approx(2 * std::log(0.45)));
  const auto back = model_from_theta(ModelKind::LG, th);
  REQUIRE(back);
  CHECK(std::get<LgParams>(back->params()).sigma_v == doctest::Approx(0.92));

  const Model scd(ScdParams{0.67, 1.5, 0.2, 0.8, 0.5});
  const auto b2 = model_from_theta(ModelKind::SCD, theta_from_model(scd));
  REQUIRE(b2);
  CHECK(std::get<ScdParams>(b2->params()).alpha == doctest::Approx(0.67));

  const std::vector<double> bad{0.0, 1.0, 0.0};
  CHECK_FALSE(model_from_theta(ModelKind::SV, bad));
  const std::vector<double> nan{0.0, std::nan(""), 0.0};
  CHECK_FALSE(model_from_theta(ModelKind::LG, nan));
  CHECK_THROWS_AS(model_from_theta(ModelKind::LG, std::vector<double>{0.0}), InputError);
}

TEST_CASE("default priors are ordered like theta") {
  // every simulation design sits within 2.5 prior sd of the prior mean in each coordinate
  const std::vector<ModelParams> designs = {
      LgParams{2.24, 0.4, 0.92},          LgParams{0.45, 0.4, 0.92},
      ScdParams{0.67, 1.5, -1.1, 0.74, 0.65}, ScdParams{6.67, 0.15, -1.1, 0.74, 0.65},
      SvParams{-6.61, 0.2, 0.7},          SvParams{-4.24, 0.6, 1.4}};
  for (const ModelParams& p : designs) {
    const Model m(p);
    const Prior prior = default_prior(m.kind());
    const std::vector<double> theta = theta_from_model(m);
    REQUIRE(theta.size() == prior.size());
    for (std::size_t k = 0; k < theta.size(); ++k)
      CHECK(std::abs(theta[k] - prior.terms[k].a) < 2.5 * std::sqrt(prior.terms[k].b));
  }
}

TEST_CASE("log prior") {
  const Prior lg = default_prior(ModelKind::LG);
  const std::vector<double> mu{std::log(0.7), 0.5, std::log(0.475)};
  CHECK(log_prior(lg, mu) == doctest::Approx(-1.5 * std::log(2 * std::numbers::pi)).epsilon(1e-14));

  const Prior f = forecast_sv_prior();
  CHECK(log_prior(f, std::vector<double>{0.0, 1.2, 0.0}) == kNegInf);
  CHECK(log_prior(f, std::vector<double>{0.0, 1.0, 0.0}) == kNegInf);

  // Beta(20, 1.5) at 0.9 against a quadrature normalizer. With x = 1 - u^2
  // the integrand x^19 (1-x)^0.5 dx becomes 2 u^2 (1-u^2)^19 du, a
  // polynomial of degree 40 that 30-point Gauss-Legendre integrates exactly.
  {
    const double z = boost::math::quadrature::gauss<double, 30>::integrate(
        [](double u) { return 2.0 * u * u * std::pow(1.0 - u * u, 19); }, 0.0, 1.0);
    const double oracle = 19 * std::log(0.9) + 0.5 * std::log(0.1) - std::log(z);
    const double normal_part = -std::log(2 * std::numbers::pi * 10.0);  // two N(0,10) at 0
    CHECK(log_prior(f, std::vector<double>{0.0, 0.9, 0.0}) - normal_part ==
          doctest::Approx(oracle).epsilon(1e-10));
  }

  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.5, 0.5, 1.0;
  const std::vector<double> m2{0.0, 0.0};
  const Prior full = normal_prior(m2, cov);
  const std::vector<double> x{0.3, -0.4};
  const Eigen::Vector2d v(0.3, -0.4);
  const double expect = -0.5 * (2 * kLogTwoPi + std::log(cov.determinant()) + v.dot(cov.inverse() * v));
  CHECK(log_prior(full, x) == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(log_prior(full, std::vector<double>{0.0}), InputError);
}

TEST_CASE("acceptance ratio") {
  CHECK(mh_accept_logratio({-3.0, -1.0}, {-3.0, -1.0}) == 0.0);
  CHECK(mh_accept_logratio({-4.0, -1.0}, {-3.0, -1.0}) == doctest::Approx(-1.0));
  CHECK(mh_accept_logratio({kNegInf, 0.0}, {-3.0, -1.0}) == kNegInf);
  CHECK(mh_accept_logratio({-2.0, kNegInf}, {-3.0, -1.0}) == kNegInf);
  // a common shift in both log-likelihoods changes nothing
  for (double c : {-1e3, 0.0, 55.5})
    CHECK(mh_accept_logratio({-4.2 + c, -1.3}, {-3.0 + c, -1.0}) ==
          doctest::Approx(mh_accept_logratio({-4.2, -1.3}, {-3.0, -1.0})).epsilon(1e-12));
}

TEST_CASE("proposal covariance during warm-up") {
  AdaptiveProposal prop(3, {});
  Rng rng = make_stream(2);
  const std::vector<double> x{1.0, -2.0, 0.5};
  const std::size_t n = 20000;
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = prop.propose(x, rng);
    const Eigen::Vector3d d(c[0] - x[0], c[1] - x[1], c[2] - x[2]);
    s += d * d.transpose();
  }
  s /= static_cast<double>(n);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k)
      CHECK(std::abs(s(i, k) - (i == k ? 0.01 : 0.0)) < 0.0006);

  prop.force_scale(0.0);
  CHECK(prop.propose(x, rng) == x);
}

TEST_CASE("adapted covariance tracks the history") {
  AdaptiveProposal::Settings st;
  st.warmup = 10;
  AdaptiveProposal prop(2, st);
  Rng rng = make_stream(4);
  for (int i = 0; i < 5000; ++i) {
    const double a = standard_normal(rng), b = standard_normal(rng);
    prop.update(std::vector<double>{2.0 * a, a + 0.5 * b}, 0.234);
  }
  const Eigen::MatrixXd c = prop.proposal_covariance() / (prop.scale() * 2.38 * 2.38 / 2.0);
  CHECK(c(0, 0) == doctest::Approx(4.0).epsilon(0.08));
  CHECK(c(0, 1) == doctest::Approx(2.0).epsilon(0.08));
  CHECK(c(1, 1) == doctest::Approx(1.25).epsilon(0.08));
  // at the target acceptance the scale does not drift
  CHECK(prop.scale() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("prior-only chain recovers the prior mean") {
  const Prior prior = default_prior(ModelKind::SV);
  const LogLikelihood zero = [](std::span<const double>, std::uint64_t) { return 0.0; };
  MhSettings ms;
  ms.iterations = 30000;
  ms.burn_in = 1000;
  ms.seed = 12;
  const std::vector<double> mu{-4.6, 0.8, std::log(0.5)};
  const Chain ch = run_mh(zero, prior, mu, ms, parameter_names(ModelKind::SV));
  for (std::size_t k = 0; k < 3; ++k) {
    const auto tr = ch.trace(k);
    const double se = std::sqrt(sample_variance(tr) * inefficiency_factor(tr) /
                                static_cast<double>(tr.size()));
    CHECK(std::abs(mean(tr) - mu[k]) < 3.0 * se);
    CHECK(sample_variance(tr) == doctest::Approx(1.0).epsilon(0.15));
  }
}

TEST_CASE("pseudo-marginal chain bookkeeping") {
  const LgParams p{0.45, 0.4, 0.92};
  const auto y = simulate(Model(p), 50, 3).y;
  FilterConfig f;
  f.kind = FilterKind::BPF;
  f.particles = 100;
  MhSettings ms;
  ms.iterations = 1500;
  ms.burn_in = 300;
  ms.seed = 5;
  const Chain ch = run_pmmh(f, ModelKind::LG, default_prior(ModelKind::LG), y,
                            theta_from_model(Model(p)), ms);
  REQUIRE(ch.size() == 1500);
  std::size_t rejected = 0;
  for (std::size_t i = 1; i < ch.size(); ++i) {
    if (!ch.accepted[i]) {
      ++rejected;
      CHECK(ch.draws[i] == ch.draws[i - 1]);
      CHECK(ch.loglik[i] == ch.loglik[i - 1]);
    }
  }
  CHECK(rejected > 0);
  CHECK(ch.filter_label == "BPF");
  CHECK(ch.trace(0).size() == 1200);
  CHECK(ch.trace(0, true).size() == 1500);

  const Chain again = run_pmmh(f, ModelKind::LG, default_prior(ModelKind::LG), y,
                               theta_from_model(Model(p)), ms);
  CHECK(again.draws == ch.draws);
  CHECK(again.loglik == ch.loglik);

  MhSettings bad = ms;
  bad.burn_in = bad.iterations;
  CHECK_THROWS_AS(run_pmmh(f, ModelKind::LG, default_prior(ModelKind::LG), y,
                           theta_from_model(Model(p)), bad),
                  InputError);
  FilterConfig fapf = f;
  fapf.kind = FilterKind::FAPF;
  CHECK_THROWS_AS(run_pmmh(fapf, ModelKind::SV, default_prior(ModelKind::SV), y,
                           std::vector<double>{-4.6, 0.8, 0.0}, ms),
                  DomainError);
}

TEST_CASE("adaptive chain acceptance settles near the target") {
  const LgParams p{0.45, 0.4, 0.92};
  const auto y = simulate(Model(p), 50, 3).y;
  MhSettings ms;
  ms.iterations = 8000;
  ms.burn_in = 2000;
  ms.seed = 9;
  const Chain ch = run_mh(kalman_loglik_fn(y), default_prior(ModelKind::LG),
                          theta_from_model(Model(p)), ms);
  CHECK(ch.acceptance_rate() >= 0.15);
  CHECK(ch.acceptance_rate() <= 0.40);
}

TEST_CASE("N_opt arithmetic") {
  CHECK(nopt_from_variance(1000, 1.7) == 2000);
  CHECK(nopt_from_variance(1000, 0.85) == 1000);
  CHECK(nopt_from_variance(1000, 0.0) == 2);
  CHECK(nopt_from_variance(500, 2 * 0.34) == 2 * nopt_from_variance(500, 0.34));
  CHECK_THROWS_AS(nopt_from_variance(1000, std::nan("")), NumericalError);

  const Model m(LgParams{0.45, 0.4, 0.92});
  const auto y = simulate(m, 30, 1).y;
  FilterConfig f;
  CHECK_THROWS_AS(calibrate_nopt(f, m, y, 100, 1, 1), InputError);
  const NoptCalibration c = calibrate_nopt(f, m, y, 100, 20, 1);
  CHECK(c.replications == 20);
  CHECK(c.excluded == 0);
  CHECK(c.n_opt == nopt_from_variance(100, c.loglik_variance));
}
