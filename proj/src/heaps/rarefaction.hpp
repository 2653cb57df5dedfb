#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "heaps/text_model.hpp"

namespace heaps {

enum class GridMode { Full, Count, Explicit };

struct GridSpec {
  GridMode mode = GridMode::Count;
  std::size_t count = 1000;

  // "full" or "count:K".
  static GridSpec parse(std::string_view text);
  std::string label() const;
};

// Strictly increasing evaluation points in [1, N], always holding 1 and N.
class SampleGrid {
 public:
  static SampleGrid full(std::uint64_t total_words);
  // K points spaced uniformly in n; collapses to the full grid when K >= N.
  static SampleGrid count(std::uint64_t total_words, std::size_t points);
  static SampleGrid explicit_points(std::uint64_t total_words, std::vector<std::uint64_t> points);
  static SampleGrid from_spec(const GridSpec& spec, std::uint64_t total_words);

  const std::vector<std::uint64_t>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::uint64_t operator[](std::size_t i) const { return points_[i]; }
  std::uint64_t total_words() const { return total_words_; }
  GridMode mode() const { return mode_; }
  bool is_full() const { return points_.size() == total_words_; }

  bool operator==(const SampleGrid&) const = default;

 private:
  SampleGrid(std::uint64_t total_words, GridMode mode, std::vector<std::uint64_t> points)
      : total_words_(total_words), mode_(mode), points_(std::move(points)) {}

  std::uint64_t total_words_ = 0;
  GridMode mode_ = GridMode::Full;
  std::vector<std::uint64_t> points_;
};

struct EnsembleCurve {
  SampleGrid grid;
  std::vector<double> mean;      // v̄(n)
  std::vector<double> variance;  // σ_v²(n)

  std::vector<double> standard_deviation() const;
};

// C(N-m, n) / C(N, n): probability that a type with m occurrences is absent
// from the first n words of a random shuffling. Exactly 0 when n > N - m.
double binomial_tail_ratio(std::uint64_t total_words, std::uint64_t multiplicity, std::uint64_t n);

// `threads` = 0 uses the hardware concurrency; results do not depend on it.
std::vector<double> mean_curve(const MultiplicitySpectrum& spec, const SampleGrid& grid,
                               unsigned threads = 1);
std::vector<double> variance_curve(const MultiplicitySpectrum& spec, const SampleGrid& grid,
                                   unsigned threads = 1);
EnsembleCurve ensemble_curve(const MultiplicitySpectrum& spec, const SampleGrid& grid,
                             unsigned threads = 1);

// True when v(n) takes the same value in every shuffling, so σ_v²(n) = 0
// analytically.
bool deterministic_point(const MultiplicitySpectrum& spec, std::uint64_t n);

// Header `n,mean,variance`.
void write_csv(std::ostream& out, const EnsembleCurve& curve);

namespace detail {
// Below this, B_N(k, n) is treated as zero; contributions are then smaller
// than V² · 1e-40.
inline constexpr long double kNegligibleRatio = 1e-40L;
// Negative variances down to this value are rounding and clamp to zero.
inline constexpr double kVarianceRoundingFloor = -1e-9;

unsigned resolve_threads(unsigned requested, std::size_t work_items);
}  // namespace detail

}  // namespace heaps
