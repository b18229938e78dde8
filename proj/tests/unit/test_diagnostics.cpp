#include <doctest.h>

#include <cmath>

#include "pmmhf/diagnostics.hpp"
#include "pmmhf/error.hpp"

using namespace pmmhf;

namespace {

std::vector<double> ar1(double a, std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  std::vector<double> x(n);
  double v = standard_normal(rng) / std::sqrt(1 - a * a);
  for (auto& e : x) {
    v = a * v + standard_normal(rng);
    e = v;
  }
  return x;
}

}  // namespace

TEST_CASE("inefficiency factor of AR(1) and i.i.d. series") {
  const auto iid = ar1(0.0, 100000, 1);
  const double f0 = inefficiency_factor(iid);
  CHECK(f0 >= 0.9);
  CHECK(f0 <= 1.1);
  const auto x = ar1(0.9, 100000, 2);
  CHECK(inefficiency_factor(x) == doctest::Approx(19.0).epsilon(0.15));
  CHECK(inefficiency_factor(x, IfEstimator::Bandwidth) == doctest::Approx(19.0).epsilon(0.2));
}

TEST_CASE("repeating every value roughly doubles the inefficiency factor") {
  const auto x = ar1(0.5, 50000, 3);
  std::vector<double> twice;
  for (double v : x) {
    twice.push_back(v);
    twice.push_back(v);
  }
  CHECK(inefficiency_factor(twice) / inefficiency_factor(x) == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("degenerate inputs") {
  CHECK(inefficiency_factor(std::vector<double>(200, 3.0)) == 1.0);
  CHECK_THROWS_AS(inefficiency_factor(std::vector<double>(50, 1.0)), InputError);
  const std::vector<double> ms{0.001, 0.002, 0.003};
  CHECK(alct(ms) == doctest::Approx(0.002));
  CHECK_THROWS_AS(alct(std::vector<double>{}), InputError);
}

TEST_CASE("autocorrelations of a constant series") {
  const auto r = autocorrelations(std::vector<double>(10, 1.0), 3);
  CHECK(r == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("diagnose summarizes the chain") {
  Chain ch;
  ch.names = {"a"};
  const auto x = ar1(0.3, 1000, 4);
  for (double v : x) {
    ch.draws.push_back({v});
    ch.loglik.push_back(0.0);
    ch.logprior.push_back(0.0);
    ch.accepted.push_back(1);
  }
  ch.burn_in = 100;
  ch.likelihood_seconds = {0.5, 1.5};
  ch.particles = 42;
  const Diagnostics d = diagnose(ch);
  CHECK(d.alct == doctest::Approx(1.0));
  CHECK(d.acceptance_rate == 1.0);
  CHECK(d.n_opt == 42);
  CHECK(d.inefficiency[0] > 1.0);
}
