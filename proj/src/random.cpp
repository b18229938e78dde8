#include "pmmhf/random.hpp"

namespace pmmhf {

namespace {

std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  std::seed_seq seq{lo(seed), hi(seed), lo(index), hi(index), lo(salt), hi(salt)};
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                          std::uint64_t salt) {
  std::seed_seq seq{lo(seed), hi(seed), lo(index), hi(index), lo(salt), hi(salt)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace pmmhf
