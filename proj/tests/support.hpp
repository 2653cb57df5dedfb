#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "heaps/text_model.hpp"

namespace heaps::testing {

inline std::vector<RawToken> tokens(std::initializer_list<std::pair<const char*, const char*>> pairs) {
  std::vector<RawToken> out;
  std::size_t line = 0;
  for (const auto& [surface, pos] : pairs) out.push_back({surface, pos, ++line});
  return out;
}

inline TextRecord text_of(std::initializer_list<std::pair<const char*, const char*>> pairs) {
  return build_text(tokens(pairs), TagMap::penn_default());
}

// Random occurrence counts with a heavy head, like word frequencies.
inline std::vector<std::uint64_t> random_counts(std::mt19937_64& rng, std::size_t max_types,
                                                std::uint64_t max_count) {
  std::uniform_int_distribution<std::size_t> types_dist(1, max_types);
  const std::size_t types = types_dist(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint64_t> counts(types);
  for (auto& c : counts) {
    const double x = u(rng);
    c = 1 + static_cast<std::uint64_t>(static_cast<double>(max_count - 1) * x * x * x);
  }
  return counts;
}

// A shuffled token stream realising `counts`, tagged at random. Without
// punctuation every token counts as a word.
inline TextRecord random_text(std::mt19937_64& rng, const std::vector<std::uint64_t>& counts,
                              bool punctuation = true) {
  static const char* const tags[] = {"NN", "VB", "DT", "JJ", "VBD", "NNS", "."};
  std::vector<std::uint32_t> stream;
  for (std::size_t t = 0; t < counts.size(); ++t) stream.insert(stream.end(), counts[t], static_cast<std::uint32_t>(t));
  std::shuffle(stream.begin(), stream.end(), rng);
  std::uniform_int_distribution<int> tag_dist(0, punctuation ? 6 : 5);
  std::vector<RawToken> raw;
  for (const auto t : stream) {
    raw.push_back({"w" + std::to_string(t), tags[tag_dist(rng)], raw.size() + 1});
  }
  // Punctuation tags may swallow a whole type; keep at least one word.
  raw.push_back({"w0", "NN", raw.size() + 1});
  return build_text(raw, TagMap::penn_default());
}

// max(1, K / r) for r = 1..V with the largest K whose total fits in `total`;
// the surplus goes to the most frequent type. Integer-only, so the Python
// reference script reproduces it exactly.
inline std::vector<std::uint64_t> zipf_counts(std::uint64_t vocabulary, std::uint64_t total) {
  const auto tally = [&](std::uint64_t k) {
    std::uint64_t sum = 0;
    for (std::uint64_t r = 1; r <= vocabulary; ++r) sum += std::max<std::uint64_t>(1, k / r);
    return sum;
  };
  std::uint64_t lo = 1;
  std::uint64_t hi = total;
  while (lo < hi) {
    const std::uint64_t mid = (lo + hi + 1) / 2;
    if (tally(mid) <= total) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  std::vector<std::uint64_t> counts(vocabulary);
  for (std::uint64_t r = 1; r <= vocabulary; ++r) counts[r - 1] = std::max<std::uint64_t>(1, lo / r);
  counts[0] += total - tally(lo);
  return counts;
}

// σ_v²(n) from the item-pair form, O(V²) per point.
inline long double naive_variance(const std::vector<std::uint64_t>& counts, std::uint64_t n) {
  std::uint64_t big_n = 0;
  for (const auto c : counts) big_n += c;
  std::vector<long double> cache(big_n + 1, -1.0L);
  const auto ratio = [&](std::uint64_t m) -> long double {
    if (n + m > big_n) return 0.0L;
    if (cache[m] >= 0.0L) return cache[m];
    // C(N-m, n) / C(N, n) as a product over n, unlike the library's product over m.
    long double r = 1.0L;
    for (std::uint64_t i = 0; i < n; ++i) {
      r *= static_cast<long double>(big_n - m - i) / static_cast<long double>(big_n - i);
    }
    return cache[m] = r;
  };
  long double total = 0.0L;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    const long double br = ratio(counts[r]);
    total += br * (1.0L - br);
    for (std::size_t s = r + 1; s < counts.size(); ++s) {
      total += 2.0L * (ratio(counts[r] + counts[s]) - br * ratio(counts[s]));
    }
  }
  return total;
}

}  // namespace heaps::testing
