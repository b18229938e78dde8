#ifndef PMMHF_RANDOM_HPP
#define PMMHF_RANDOM_HPP

#include <cstdint>
#include <random>

namespace pmmhf {

using Rng = std::mt19937_64;

/// Independent stream for task `index` of a run seeded with `seed`.
/// `salt` separates unrelated consumers (proposal vs likelihood, etc.)
/// that share the same seed and index space.
Rng make_stream(std::uint64_t seed, std::uint64_t index = 0,
                std::uint64_t salt = 0);

/// Scalar seed for a derived stream; used where a seed, not an engine,
/// has to be handed to another component.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                          std::uint64_t salt = 0);

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace pmmhf

#endif
