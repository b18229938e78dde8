#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "pmmhf/error.hpp"
#include "pmmhf/models.hpp"
#include "pmmhf/numeric.hpp"

using namespace pmmhf;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double integrate(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

}  // namespace

TEST_CASE("SNR of the simulation designs") {
  // sigma_x^2 / sigma_m^2 for the two LG designs
  CHECK(Model(LgParams{2.24, 0.4, 0.92}).snr() == doctest::Approx(0.2).epsilon(0.02));
  CHECK(Model(LgParams{0.45, 0.4, 0.92}).snr() == doctest::Approx(5.0).epsilon(0.02));
  const double sv_var = std::numbers::pi * std::numbers::pi / 2.0;
  CHECK(Model(SvParams{-6.61, 0.2, 0.7}).measurement_error_variance() ==
        doctest::Approx(sv_var).epsilon(1e-14));
}

TEST_CASE("SCD transformed error variance equals trigamma(alpha)") {
  for (double alpha : {0.5, 0.67, 2.0, 7.5}) {
    const Model m(ScdParams{alpha, 1.3, 0.1, 0.5, 0.4});
    CHECK(m.measurement_error_variance() ==
          doctest::Approx(boost::math::trigamma(alpha)).epsilon(1e-9));
    CHECK(m.transformed_error_variance() ==
          doctest::Approx(m.measurement_error_variance()).epsilon(1e-9));
  }
}

TEST_CASE("measurement densities integrate to one over y") {
  const Model lg(LgParams{0.7, 0.5, 0.6});
  const Model sv(SvParams{-1.0, 0.9, 0.3});
  const Model scd(ScdParams{0.67, 1.5, 0.2, 0.8, 0.5});
  for (double x : {-1.3, 0.0, 0.8}) {
    CHECK(integrate([&](double y) { return lg.measurement_density(x, y); }, -kInf, kInf) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(integrate([&](double y) { return sv.measurement_density(x, y); }, -kInf, kInf) ==
          doctest::Approx(1.0).epsilon(1e-9));
    // substitute y = e^u to tame the integrable pole at 0 when alpha < 1
    CHECK(integrate([&](double u) { return scd.measurement_density(x, std::exp(u)) * std::exp(u); },
                    -200.0, 30.0) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("transformed densities integrate to one and SV peaks at z = x") {
  const Model sv(SvParams{-1.0, 0.9, 0.3});
  const Model scd(ScdParams{0.67, 1.5, 0.2, 0.8, 0.5});
  const double x = 0.4;
  for (const Model* m : {&sv, &scd}) {
    const double mass =
        integrate([&](double z) { return std::exp(m->log_transformed_density(z, x)); }, -kInf, kInf);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    const double mean =
        integrate([&](double z) { return z * std::exp(m->log_transformed_density(z, x)); }, -kInf,
                  kInf);
    CHECK(mean == doctest::Approx(x + m->transformed_error_mean()).epsilon(1e-8));
  }
  // d/dz [(z-x)/2 - e^{z-x}/2] = 0 at z = x
  const double h = 1e-4;
  CHECK(sv.log_transformed_density(x, x) > sv.log_transformed_density(x + h, x));
  CHECK(sv.log_transformed_density(x, x) > sv.log_transformed_density(x - h, x));
}

TEST_CASE("inversion recovers the state and the Jacobian") {
  const Model lg(LgParams{0.7, 0.5, 0.6});
  const Model sv(SvParams{-1.0, 0.9, 0.3});
  const Model scd(ScdParams{0.67, 1.5, 0.2, 0.8, 0.5});
  for (const Model* m : {&lg, &sv, &scd}) {
    const double x = 0.37;
    const double eta = m->kind() == ModelKind::LG ? -0.8 : 1.3;
    const double y = m->measure(x, eta);
    const Inversion inv = m->invert_measurement(y, eta);
    CHECK(inv.x == doctest::Approx(x).epsilon(1e-13));
    const double h = 1e-6;
    const double dh = (m->measure(x + h, eta) - m->measure(x - h, eta)) / (2 * h);
    CHECK(inv.jac_inv == doctest::Approx(1.0 / std::abs(dh)).epsilon(1e-7));
  }
  // SV takes the root through |y| / |eta|
  const Inversion neg = sv.invert_measurement(-0.5, 1.3);
  CHECK(neg.x == doctest::Approx(2.0 * std::log(0.5 / 1.3)).epsilon(1e-14));
  CHECK(sv.log_inversion_ratio() == doctest::Approx(-std::numbers::ln2));
  CHECK_THROWS_AS(sv.invert_measurement(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(scd.invert_measurement(-1.0, 1.0), DomainError);
  CHECK_FALSE(scd.invertible(0.0));
}

TEST_CASE("initial laws") {
  const Model lg(LgParams{0.7, 0.5, 0.6});
  CHECK(lg.initial_variance() == doctest::Approx(0.36 / 0.75));
  const Model sv(SvParams{-1.0, 0.9, 0.3});
  CHECK(sv.initial_mean() == doctest::Approx(-10.0));
  CHECK(sv.initial_variance() == doctest::Approx(0.09 / 0.01));
  CHECK(sv.stationary_variance() == doctest::Approx(0.09 / 0.19));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(Model(LgParams{0.7, 1.0, 0.6}), DomainError);
  CHECK_THROWS_AS(Model(LgParams{-0.7, 0.5, 0.6}), DomainError);
  CHECK_THROWS_AS(Model(SvParams{0.0, 0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(Model(ScdParams{0.0, 1.0, 0.0, 0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(Model(ScdParams{1.0, 1.0, 0.0, 0.5, 0.5}).log_measurement_density(0.0, -1.0),
                  DomainError);
}

TEST_CASE("simulation is reproducible from the seed") {
  const Model sv(SvParams{-0.5, 0.95, 0.2});
  const auto a = simulate(sv, 200, 11);
  const auto b = simulate(sv, 200, 11);
  const auto c = simulate(sv, 200, 12);
  CHECK(a.y == b.y);
  CHECK(a.x == b.x);
  CHECK(a.y != c.y);
  CHECK(a.y.size() == 200);
  CHECK(a.x.size() == 201);
  for (std::size_t t = 0; t < a.y.size(); ++t) CHECK(std::isfinite(a.y[t]));
}

TEST_CASE("simulated LG moments match the stationary law") {
  const Model lg(LgParams{0.5, 0.8, 0.6});
  const auto s = simulate(lg, 200000, 3);
  CHECK(mean(s.x) == doctest::Approx(0.0).epsilon(0.03).scale(1.0));
  CHECK(sample_variance(s.x) == doctest::Approx(lg.stationary_variance()).epsilon(0.03));
  CHECK(sample_variance(s.y) ==
        doctest::Approx(lg.stationary_variance() + 0.25).epsilon(0.03));
}

TEST_CASE("SVIJ paths") {
  SvijParams p;
  const SvijPath a = simulate_svij_path(p, 500, 4);
  const SvijPath b = simulate_svij_path(p, 500, 4);
  CHECK(a.y == b.y);
  CHECK(a.x.size() == 501);
  for (double x : a.x) CHECK(x >= kSvijVarianceFloor);

  // Without jumps the diffusion draws are unchanged, so the jump-free path
  // differs only where a jump fired.
  SvijParams q = p;
  q.p_jump_price = 0.0;
  q.p_jump_vol = 0.0;
  const SvijPath c = simulate_svij_path(q, 500, 4);
  for (bool j : c.price_jump) CHECK_FALSE(j);
  std::size_t first_jump = 500;
  for (std::size_t t = 0; t < 500; ++t)
    if (a.price_jump[t] || a.vol_jump[t]) {
      first_jump = t;
      break;
    }
  REQUIRE(first_jump < 500);
  for (std::size_t t = 0; t < first_jump; ++t) CHECK(a.y[t] == c.y[t]);

  SvijParams bad = p;
  bad.p_jump_price = 1.5;
  CHECK_THROWS_AS(validate(bad), DomainError);
}
