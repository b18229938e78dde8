#ifndef PMMHF_FILTERS_HPP
#define PMMHF_FILTERS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmmhf/models.hpp"
#include "pmmhf/random.hpp"
#include "pmmhf/unscented.hpp"

namespace pmmhf {

enum class FilterKind { BPF, FAPF, UPF, DPF, UDPF };

std::string_view to_string(FilterKind kind);
FilterKind parse_filter_kind(std::string_view name);
/// FAPF needs the closed-form predictive, which only the LG model has.
bool supports(FilterKind filter, ModelKind model);

/// Particles with normalized weights at time t.
struct ParticleCloud {
  std::vector<double> particles;
  std::vector<double> weights;
  std::size_t t = 0;

  std::size_t size() const { return particles.size(); }
  static ParticleCloud uniform(std::vector<double> particles, std::size_t t = 0);
};

struct StepResult {
  ParticleCloud cloud;
  /// log of sum_j w_j, the incremental likelihood estimate; -inf when every
  /// weight vanished.
  double log_increment = 0.0;
  /// True when the kernel already returns an equally weighted, resampled cloud.
  bool resampled = false;
};

/// L cyclic rotations of (0..N-1); rotation l matches new particle j with
/// previous particle (j + l) mod N.
class MatchPlan {
 public:
  MatchPlan(std::size_t n, std::size_t l);

  std::size_t particles() const { return n_; }
  std::size_t matches() const { return l_; }
  std::size_t index(std::size_t l, std::size_t j) const { return (j + l) % n_; }
  std::vector<std::size_t> permutation(std::size_t l) const;

 private:
  std::size_t n_;
  std::size_t l_;
};

/// Throws DomainError unless 1 <= L <= N.
MatchPlan cyclic_permutations(std::size_t N, std::size_t L);

enum class ResamplingScheme { Multinomial, Systematic };

/// Ancestor indices drawn according to `weights` (which need not sum to 1).
/// Throws DegeneracyError when the weights sum to zero.
std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t n,
                                          Rng& rng,
                                          ResamplingScheme scheme = ResamplingScheme::Multinomial);

/// N draws by weight; the result carries weights 1/N.
ParticleCloud resample(const ParticleCloud& cloud, Rng& rng,
                       ResamplingScheme scheme = ResamplingScheme::Multinomial);

StepResult bpf_step(const ParticleCloud& cloud, const Model& model, double y_next, Rng& rng);

/// Throws DomainError if y_next cannot be inverted or the plan size differs
/// from the cloud.
StepResult dpf_step(const ParticleCloud& cloud, const Model& model, double y_next,
                    const MatchPlan& plan, Rng& rng);

StepResult udpf_step(const ParticleCloud& cloud, const Model& model, double y_next,
                     const SigmaPointSet& sigma, Rng& rng);

/// Gaussian proposal moments the UPF uses for a particle at x_prev.
GaussianMoments upf_proposal_moments(const Model& model, double x_prev, double y_next);

StepResult upf_step(const ParticleCloud& cloud, const Model& model, double y_next, Rng& rng);

/// Throws DomainError for non-LG models.
StepResult fapf_step(const ParticleCloud& cloud, const Model& model, double y_next, Rng& rng);

struct FilterOptions {
  std::size_t matches = 1;  // L, DPF only
  int sigma_size = 0;       // M for the UDPF sigma set; 0 picks the default
  ResamplingScheme resampling = ResamplingScheme::Multinomial;
};

struct FilterConfig {
  FilterKind kind = FilterKind::BPF;
  std::size_t particles = 100;
  FilterOptions options;

  /// "BPF", "DPF(L=30)", ...
  std::string label() const;
};

struct FilterRun {
  double loglik = 0.0;
  std::vector<double> increments;
  ParticleCloud final_cloud;
  double elapsed_seconds = 0.0;
  bool degenerate = false;
};

/// Runs the filter from x_0 ~ p(x_0) with weights 1/N, resampling after each
/// step. Degeneracy (all weights zero, unusable proposal moments) gives
/// loglik = -inf with the flag set. DomainError from the data propagates.
FilterRun run_filter(FilterKind kind, const Model& model, std::span<const double> y,
                     std::size_t N, const FilterOptions& options, std::uint64_t seed);

FilterRun run_filter(const FilterConfig& config, const Model& model, std::span<const double> y,
                     std::uint64_t seed);

}  // namespace pmmhf

#endif
