#include "heaps/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <random>
#include <thread>

#include "heaps/error.hpp"

namespace heaps {

std::vector<std::uint32_t> materialize(const MultiplicitySpectrum& spec) {
  std::vector<std::uint32_t> sequence;
  sequence.reserve(spec.total_words());
  std::uint32_t type = 0;
  for (const auto& e : spec.entries()) {
    for (std::uint64_t c = 0; c < e.types; ++c, ++type) sequence.insert(sequence.end(), e.multiplicity, type);
  }
  return sequence;
}

OracleCurves exhaustive_oracle(const MultiplicitySpectrum& spec) {
  const auto big_n = spec.total_words();
  if (big_n > kExhaustiveLimit) {
    fail(ErrorCode::TooLarge, "exhaustive enumeration is limited to N <= " + std::to_string(kExhaustiveLimit) +
                                  ", got N=" + std::to_string(big_n));
  }
  auto sequence = materialize(spec);
  std::sort(sequence.begin(), sequence.end());

  std::vector<std::uint64_t> sum(big_n, 0);
  std::vector<std::uint64_t> sum_sq(big_n, 0);
  std::vector<bool> seen(spec.vocabulary_size());
  std::uint64_t arrangements = 0;
  // next_permutation visits each distinct multiset arrangement once.
  do {
    std::fill(seen.begin(), seen.end(), false);
    std::uint64_t distinct = 0;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
      if (!seen[sequence[i]]) {
        seen[sequence[i]] = true;
        ++distinct;
      }
      sum[i] += distinct;
      sum_sq[i] += distinct * distinct;
    }
    ++arrangements;
  } while (std::next_permutation(sequence.begin(), sequence.end()));

  OracleCurves out{SampleGrid::full(big_n), {}, {}, std::nullopt, arrangements, {}, 0};
  out.mean.resize(big_n);
  out.variance.resize(big_n);
  const auto k = static_cast<unsigned __int128>(arrangements);
  const long double k2 = static_cast<long double>(arrangements) * static_cast<long double>(arrangements);
  for (std::size_t i = 0; i < big_n; ++i) {
    out.mean[i] = static_cast<double>(static_cast<long double>(sum[i]) / static_cast<long double>(arrangements));
    // Exact numerator K·Σv² - (Σv)².
    const unsigned __int128 numerator = k * sum_sq[i] - static_cast<unsigned __int128>(sum[i]) * sum[i];
    out.variance[i] = static_cast<double>(static_cast<long double>(numerator) / k2);
  }
  return out;
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// Unbiased draw from [0, range) (Lemire's multiply-shift with rejection).
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
  unsigned __int128 product = static_cast<unsigned __int128>(rng()) * range;
  auto low = static_cast<std::uint64_t>(product);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      product = static_cast<unsigned __int128>(rng()) * range;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

// Power sums of v(n) - reference(n) over a batch of samples. Integer sums are
// exact, so merging batches in any order gives the same totals.
struct Moments {
  std::vector<__int128> s1, s2, s3, s4;

  explicit Moments(std::size_t points) : s1(points, 0), s2(points, 0), s3(points, 0), s4(points, 0) {}

  void add(const Moments& other) {
    for (std::size_t i = 0; i < s1.size(); ++i) {
      s1[i] += other.s1[i];
      s2[i] += other.s2[i];
      s3[i] += other.s3[i];
      s4[i] += other.s4[i];
    }
  }
};

void heaps_on_grid(std::span<const std::uint32_t> sequence, const SampleGrid& grid,
                   std::vector<std::uint32_t>& stamp, std::uint32_t mark, std::vector<std::int64_t>& out) {
  std::size_t g = 0;
  std::int64_t distinct = 0;
  for (std::size_t i = 0; i < sequence.size() && g < grid.size(); ++i) {
    if (stamp[sequence[i]] != mark) {
      stamp[sequence[i]] = mark;
      ++distinct;
    }
    if (grid[g] == i + 1) out[g++] = distinct;
  }
}

OracleCurves run_monte_carlo(std::span<const std::uint32_t> base, std::size_t vocabulary,
                             std::uint64_t samples, std::uint64_t seed, const SampleGrid& grid,
                             unsigned threads) {
  if (samples < 2) fail(ErrorCode::Domain, "Monte Carlo oracle needs at least 2 samples");
  if (grid.total_words() != base.size()) fail(ErrorCode::GridMismatch, "grid does not match the text length");
  const std::size_t points = grid.size();

  std::vector<std::int64_t> reference(points);
  {
    std::vector<std::uint32_t> stamp(vocabulary, 0);
    heaps_on_grid(base, grid, stamp, 1, reference);
  }

  constexpr std::uint64_t kBatch = 64;
  const std::uint64_t batches = (samples + kBatch - 1) / kBatch;
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, batches));

  Moments total(points);
  std::mutex merge;
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      Moments local(points);
      std::vector<std::uint32_t> sequence(base.size());
      std::vector<std::uint32_t> stamp(vocabulary, 0);
      std::vector<std::int64_t> v(points);
      std::uint32_t mark = 0;
      for (std::uint64_t b = next++; b < batches; b = next++) {
        const std::uint64_t last = std::min(samples, (b + 1) * kBatch);
        for (std::uint64_t s = b * kBatch; s < last; ++s) {
          std::mt19937_64 rng(sample_seed(seed, s));
          std::copy(base.begin(), base.end(), sequence.begin());
          for (std::size_t i = sequence.size(); i > 1; --i) {
            std::swap(sequence[i - 1], sequence[bounded(rng, i)]);
          }
          if (++mark == 0) {
            std::fill(stamp.begin(), stamp.end(), 0);
            mark = 1;
          }
          heaps_on_grid(sequence, grid, stamp, mark, v);
          for (std::size_t g = 0; g < points; ++g) {
            const __int128 d = v[g] - reference[g];
            local.s1[g] += d;
            local.s2[g] += d * d;
            local.s3[g] += d * d * d;
            local.s4[g] += d * d * d * d;
          }
        }
      }
      std::lock_guard lock(merge);
      total.add(local);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  OracleCurves out{grid, {}, {}, samples, samples, {}, seed};
  out.mean.resize(points);
  out.variance.resize(points);
  out.fourth_moment.resize(points);
  const auto n = static_cast<long double>(samples);
  for (std::size_t g = 0; g < points; ++g) {
    const auto s1 = static_cast<long double>(total.s1[g]);
    const auto s2 = static_cast<long double>(total.s2[g]);
    const auto s3 = static_cast<long double>(total.s3[g]);
    const auto s4 = static_cast<long double>(total.s4[g]);
    const __int128 spread = static_cast<__int128>(samples) * total.s2[g] - total.s1[g] * total.s1[g];
    const long double a = s1 / n;
    out.mean[g] = static_cast<double>(static_cast<long double>(reference[g]) + a);
    out.variance[g] = static_cast<double>(static_cast<long double>(spread) / (n * (n - 1.0L)));
    const long double m4 = (s4 - 4.0L * a * s3 + 6.0L * a * a * s2 - 3.0L * a * a * a * a * n) / n;
    out.fourth_moment[g] = static_cast<double>(std::max(m4, 0.0L));
  }
  return out;
}

}  // namespace

OracleCurves monte_carlo_oracle(const TextRecord& text, std::uint64_t samples, std::uint64_t seed,
                                const SampleGrid& grid, unsigned threads) {
  std::vector<std::uint32_t> base;
  base.reserve(text.total_words());
  for (const auto& t : text.tokens()) base.push_back(t.type);
  return run_monte_carlo(base, text.vocabulary_size(), samples, seed, grid, threads);
}

OracleCurves monte_carlo_oracle(const MultiplicitySpectrum& spec, std::uint64_t samples, std::uint64_t seed,
                                const SampleGrid& grid, unsigned threads) {
  const auto base = materialize(spec);
  return run_monte_carlo(base, spec.vocabulary_size(), samples, seed, grid, threads);
}

}  // namespace heaps
