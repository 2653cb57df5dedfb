#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "heaps/rarefaction.hpp"
#include "heaps/text_model.hpp"

namespace heaps {

inline constexpr std::string_view kGeneratorName = "mt19937_64 seeded per sample by splitmix64(seed, index)";
inline constexpr std::uint64_t kExhaustiveLimit = 12;

struct OracleCurves {
  SampleGrid grid;
  std::vector<double> mean;
  std::vector<double> variance;  // population variance (exhaustive), unbiased (Monte Carlo)
  std::optional<std::uint64_t> samples;  // empty for exhaustive enumeration
  std::uint64_t arrangements = 0;        // distinct orderings visited
  std::vector<double> fourth_moment;     // central, Monte Carlo only
  std::uint64_t seed = 0;
};

// Mean and variance of v(n) over every distinct ordering of the multiset
// described by `spec`. Requires N <= 12.
OracleCurves exhaustive_oracle(const MultiplicitySpectrum& spec);

// Sample statistics of v(n) over `samples` uniform shufflings. Sample i is
// driven by its own generator so the result is identical for any thread count.
OracleCurves monte_carlo_oracle(const TextRecord& text, std::uint64_t samples, std::uint64_t seed,
                                const SampleGrid& grid, unsigned threads = 0);
OracleCurves monte_carlo_oracle(const MultiplicitySpectrum& spec, std::uint64_t samples,
                                std::uint64_t seed, const SampleGrid& grid, unsigned threads = 0);

// Seed of the generator used for sample `index`.
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index);

// Type sequence with each type's occurrences contiguous, types ordered by
// increasing multiplicity.
std::vector<std::uint32_t> materialize(const MultiplicitySpectrum& spec);

}  // namespace heaps
