#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "../support/oracles.hpp"
#include "pmmhf/error.hpp"
#include "pmmhf/filters.hpp"
#include "pmmhf/kalman.hpp"
#include "pmmhf/numeric.hpp"

using namespace pmmhf;

namespace {

ParticleCloud random_cloud(std::size_t n, double centre, double spread, Rng& rng) {
  ParticleCloud c;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    c.particles.push_back(centre + spread * standard_normal(rng));
    c.weights.push_back(0.2 + uniform01(rng));
    total += c.weights.back();
  }
  for (double& w : c.weights) w /= total;
  return c;
}

}  // namespace

TEST_CASE("cyclic match plans are bijections") {
  const MatchPlan plan = cyclic_permutations(7, 7);
  for (std::size_t l = 0; l < 7; ++l) {
    const auto perm = plan.permutation(l);
    CHECK(std::set<std::size_t>(perm.begin(), perm.end()).size() == 7);
  }
  CHECK_THROWS_AS(cyclic_permutations(5, 6), DomainError);
  CHECK_THROWS_AS(cyclic_permutations(5, 0), DomainError);
}

TEST_CASE("resampling counts follow the weights") {
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  Rng rng = make_stream(1);
  std::vector<double> counts(4, 0.0);
  const std::size_t reps = 2000, n = 100;
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t i : resample_indices(w, n, rng)) counts[i] += 1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double expected = w[i] * n * reps;
    const double sd = std::sqrt(n * reps * w[i] * (1 - w[i]));
    CHECK(std::abs(counts[i] - expected) < 4.0 * sd);
  }
  // systematic: every count within one of N w_i
  const auto idx = resample_indices(w, 10, rng, ResamplingScheme::Systematic);
  std::vector<int> c(4, 0);
  for (std::size_t i : idx) ++c[i];
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(c[i] - 10.0 * w[i]) <= 1.0);
  const std::vector<double> zero(4, 0.0);
  CHECK_THROWS_AS(resample_indices(zero, 4, rng), DegeneracyError);
}

TEST_CASE("DPF with full matching equals the double-loop oracle") {
  const ModelParams designs[] = {LgParams{0.7, 0.5, 0.6}, SvParams{-1.0, 0.9, 0.3},
                                 ScdParams{0.67, 1.5, 0.2, 0.8, 0.5}};
  for (const ModelParams& p : designs) {
    const Model m(p);
    const auto sim = simulate(m, 10, 21);
    Rng init = make_stream(5);
    for (std::size_t n : {1u, 7u, 20u}) {
      ParticleCloud cloud = random_cloud(n, m.stationary_mean(), 1.0, init);
      const MatchPlan plan = cyclic_permutations(n, n);
      for (std::size_t t = 0; t < sim.y.size(); ++t) {
        Rng rng = make_stream(100 + t, n);
        Rng replay = rng;
        std::vector<double> eta(n);
        for (double& e : eta) e = m.inversion_law().sample(replay);
        const StepResult step = dpf_step(cloud, m, sim.y[t], plan, rng);
        const auto ref = oracle::dpf_full_matching(p, cloud, sim.y[t], eta);
        for (std::size_t j = 0; j < n; ++j) {
          CHECK(std::abs(step.cloud.particles[j] - ref.particles[j]) <=
                1e-12 * std::max(1.0, std::abs(ref.particles[j])));
          CHECK(std::abs(step.cloud.weights[j] - ref.weights[j]) <= 1e-12);
        }
        CHECK(std::abs(step.log_increment - ref.log_increment) <=
              1e-12 * std::max(1.0, std::abs(ref.log_increment)));
        cloud = resample(step.cloud, rng);
      }
    }
  }
}

TEST_CASE("DPF rejects observations it cannot invert") {
  const Model sv(SvParams{-1.0, 0.9, 0.3});
  Rng rng = make_stream(1);
  const auto cloud = ParticleCloud::uniform({0.0, 0.1, 0.2});
  CHECK_THROWS_AS(dpf_step(cloud, sv, 0.0, cyclic_permutations(3, 1), rng), DomainError);
  CHECK_THROWS_AS(dpf_step(cloud, sv, 0.5, cyclic_permutations(4, 1), rng), DomainError);
  const std::vector<double> y{0.3, 0.0, 0.1};
  CHECK_THROWS_AS(run_filter(FilterKind::DPF, sv, y, 10, {}, 1), DomainError);
}

TEST_CASE("UDPF weights on the LG model reduce to the predictive density") {
  // With exact measurement moments the proposal is p(x_t | x_{t-1}, y_t), so
  // each weight is pi_j N(y; rho x_j, sigma_v^2 + sigma_eta^2) whatever x_t is.
  const LgParams p{0.45, 0.4, 0.92};
  const Model m(p);
  const SigmaPointSet s = build_sigma_points(m.inversion_law(), 3);
  Rng init = make_stream(8);
  const ParticleCloud cloud = random_cloud(50, 0.0, 1.0, init);
  const double y = 0.7;
  Rng rng = make_stream(9);
  const StepResult step = udpf_step(cloud, m, y, s, rng);
  std::vector<double> ref(50);
  double total = 0.0;
  for (std::size_t j = 0; j < 50; ++j) {
    ref[j] = cloud.weights[j] * oracle::normal_pdf(y, p.rho * cloud.particles[j],
                                                   p.sigma_v * p.sigma_v + p.sigma_eta * p.sigma_eta);
    total += ref[j];
  }
  for (std::size_t j = 0; j < 50; ++j) CHECK(step.cloud.weights[j] == doctest::Approx(ref[j] / total).epsilon(1e-12));
  CHECK(step.log_increment == doctest::Approx(std::log(total)).epsilon(1e-12));

  // identical ancestors: the weights carry no variance
  const ParticleCloud same = ParticleCloud::uniform(std::vector<double>(50, 0.3));
  const StepResult flat = udpf_step(same, m, y, s, rng);
  const double mw = mean(flat.cloud.weights);
  CHECK(std::sqrt(sample_variance(flat.cloud.weights)) / mw < 1e-8);
}

TEST_CASE("FAPF returns an equally weighted cloud and needs the LG model") {
  const Model lg(LgParams{0.45, 0.4, 0.92});
  Rng rng = make_stream(3);
  const StepResult r = fapf_step(ParticleCloud::uniform({0.1, -0.2, 0.4}), lg, 0.5, rng);
  CHECK(r.resampled);
  for (double w : r.cloud.weights) CHECK(w == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(fapf_step(ParticleCloud::uniform({0.1}), Model(SvParams{0, 0.5, 0.3}), 0.5, rng),
                  DomainError);
  CHECK_FALSE(supports(FilterKind::FAPF, ModelKind::SV));
}

TEST_CASE("FAPF with one particle per step gives the exact one-step likelihood") {
  // FAPF's first-stage weights integrate x_t out exactly; starting every
  // particle at the same x_0 makes the increment deterministic.
  const LgParams p{0.5, 0.6, 0.8};
  const Model m(p);
  Rng rng = make_stream(4);
  const double x0 = 0.25, y = -0.3;
  const StepResult r = fapf_step(ParticleCloud::uniform({x0, x0}), m, y, rng);
  CHECK(r.log_increment ==
        doctest::Approx(std::log(oracle::normal_pdf(y, p.rho * x0, 0.64 + 0.25))).epsilon(1e-13));
}

TEST_CASE("one-observation likelihood estimates are unbiased") {
  // E[p_hat(y_1)] = p(y_1); the reference integral is by quadrature.
  struct Case {
    ModelParams p;
    double y;
  };
  const Case cases[] = {{LgParams{0.7, 0.5, 0.6}, 0.9},
                        {SvParams{-0.4, 0.8, 0.5}, -1.1},
                        {ScdParams{0.67, 1.5, 0.1, 0.7, 0.5}, 0.6},
                        {ScdParams{3.0, 2.0, 0.1, 0.7, 0.5}, 1.4}};
  const FilterKind kinds[] = {FilterKind::BPF, FilterKind::FAPF, FilterKind::UPF, FilterKind::DPF,
                              FilterKind::UDPF};
  for (const Case& c : cases) {
    const Model m(c.p);
    const double truth = oracle::one_step_likelihood(m, c.y);
    const std::vector<double> y{c.y};
    for (FilterKind k : kinds) {
      if (!supports(k, m.kind())) continue;
      for (std::size_t L : {1u, 5u}) {
        if (L > 1 && k != FilterKind::DPF) continue;
        FilterOptions opt;
        opt.matches = L;
        const std::size_t reps = 4000;
        std::vector<double> ratio(reps);
        for (std::size_t r = 0; r < reps; ++r)
          ratio[r] = std::exp(run_filter(k, m, y, 10, opt, derive_seed(77, r)).loglik) / truth;
        const double mu = mean(ratio);
        const double se = std::sqrt(sample_variance(ratio) / static_cast<double>(reps));
        INFO(to_string(k), " L=", L, " model=", to_string(m.kind()), " mean=", mu, " se=", se);
        CHECK(std::abs(mu - 1.0) < 3.0 * se);
      }
    }
  }
}

TEST_CASE("filter runs are reproducible and close to Kalman for large N") {
  const LgParams p{0.45, 0.4, 0.92};
  const Model m(p);
  const auto y = simulate(m, 40, 2).y;
  const double exact = kalman_loglik(p, y);
  const FilterKind kinds[] = {FilterKind::BPF, FilterKind::FAPF, FilterKind::UPF, FilterKind::DPF,
                              FilterKind::UDPF};
  for (FilterKind k : kinds) {
    const FilterRun a = run_filter(k, m, y, 2000, {}, 6);
    const FilterRun b = run_filter(k, m, y, 2000, {}, 6);
    CHECK(a.loglik == b.loglik);
    CHECK(a.increments.size() == y.size());
    CHECK(a.final_cloud.size() == 2000);
    CHECK(a.loglik == doctest::Approx(exact).epsilon(0.01));
  }
}

TEST_CASE("label names") {
  FilterConfig c;
  c.kind = FilterKind::DPF;
  c.options.matches = 30;
  CHECK(c.label() == "DPF(L=30)");
  CHECK(parse_filter_kind("UDPF") == FilterKind::UDPF);
}
