#include "heaps/rarefaction.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "heaps/error.hpp"

namespace heaps {

// ---------------------------------------------------------------------------
// Grids

GridSpec GridSpec::parse(std::string_view text) {
  if (text == "full") return {GridMode::Full, 0};
  constexpr std::string_view prefix = "count:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string digits(text.substr(prefix.size()));
    std::size_t consumed = 0;
    unsigned long long k = 0;
    try {
      k = std::stoull(digits, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (consumed == digits.size() && !digits.empty() && k >= 2) {
      return {GridMode::Count, static_cast<std::size_t>(k)};
    }
  }
  fail(ErrorCode::InvalidArgument, "grid must be 'full' or 'count:K' with K >= 2, got '" +
                                       std::string(text) + "'");
}

std::string GridSpec::label() const {
  switch (mode) {
    case GridMode::Full: return "full";
    case GridMode::Count: return "count:" + std::to_string(count);
    case GridMode::Explicit: return "explicit";
  }
  return "?";
}

SampleGrid SampleGrid::full(std::uint64_t total_words) {
  if (total_words == 0) fail(ErrorCode::Domain, "grid over an empty text");
  std::vector<std::uint64_t> points(total_words);
  for (std::uint64_t n = 0; n < total_words; ++n) points[n] = n + 1;
  return SampleGrid(total_words, GridMode::Full, std::move(points));
}

SampleGrid SampleGrid::count(std::uint64_t total_words, std::size_t k) {
  if (total_words == 0) fail(ErrorCode::Domain, "grid over an empty text");
  if (k < 2) fail(ErrorCode::Domain, "a counted grid needs at least 2 points");
  if (k >= total_words) {
    auto grid = full(total_words);
    grid.mode_ = GridMode::Count;
    return grid;
  }
  std::vector<std::uint64_t> points;
  points.reserve(k);
  const long double step = static_cast<long double>(total_words - 1) / static_cast<long double>(k - 1);
  for (std::size_t i = 0; i < k; ++i) {
    const auto n = static_cast<std::uint64_t>(std::llround(1.0L + step * static_cast<long double>(i)));
    if (points.empty() || n > points.back()) points.push_back(n);
  }
  points.back() = total_words;
  return SampleGrid(total_words, GridMode::Count, std::move(points));
}

SampleGrid SampleGrid::explicit_points(std::uint64_t total_words, std::vector<std::uint64_t> points) {
  if (total_words == 0) fail(ErrorCode::Domain, "grid over an empty text");
  for (const auto n : points) {
    if (n < 1 || n > total_words) {
      fail(ErrorCode::Domain, "grid point " + std::to_string(n) + " outside [1, " +
                                  std::to_string(total_words) + "]");
    }
  }
  points.push_back(1);
  points.push_back(total_words);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return SampleGrid(total_words, GridMode::Explicit, std::move(points));
}

SampleGrid SampleGrid::from_spec(const GridSpec& spec, std::uint64_t total_words) {
  switch (spec.mode) {
    case GridMode::Full: return full(total_words);
    case GridMode::Count: return count(total_words, spec.count);
    case GridMode::Explicit: break;
  }
  fail(ErrorCode::InvalidArgument, "explicit grids need their point list");
}

std::vector<double> EnsembleCurve::standard_deviation() const {
  std::vector<double> sd(variance.size());
  std::transform(variance.begin(), variance.end(), sd.begin(), [](double v) { return std::sqrt(v); });
  return sd;
}

// ---------------------------------------------------------------------------
// B_N(m, n)

double binomial_tail_ratio(std::uint64_t total_words, std::uint64_t m, std::uint64_t n) {
  const std::uint64_t big_n = total_words;
  if (m < 1 || m > big_n || n > big_n) {
    fail(ErrorCode::Domain, "B_N(m, n) needs 1 <= m <= N and 0 <= n <= N (N=" + std::to_string(big_n) +
                                ", m=" + std::to_string(m) + ", n=" + std::to_string(n) + ")");
  }
  if (n > big_n - m) return 0.0;
  // C(N-m, n)/C(N, n) = C(N-n, m)/C(N, m); take the shorter product.
  const std::uint64_t terms = std::min(m, n);
  const std::uint64_t shift = (terms == n) ? m : n;
  long double ratio = 1.0L;
  for (std::uint64_t i = 0; i < terms && ratio > 0.0L; ++i) {
    ratio *= static_cast<long double>(big_n - shift - i) / static_cast<long double>(big_n - i);
  }
  return static_cast<double>(ratio);
}

// ---------------------------------------------------------------------------
// Curves

namespace detail {

unsigned resolve_threads(unsigned requested, std::size_t work_items) {
  unsigned threads = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (work_items < 64) threads = 1;
  return static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(work_items, 1)));
}

}  // namespace detail

namespace {

// Splits [0, count) into contiguous blocks, one per thread. Each block is
// processed independently so the output never depends on the thread count.
template <typename Fn>
void for_blocks(std::size_t count, unsigned threads, Fn&& fn) {
  threads = detail::resolve_threads(threads, count);
  if (threads <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::jthread> workers;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t block = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(count, t * block);
    const std::size_t end = std::min(count, begin + block);
    workers.emplace_back([&, t, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  workers.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_grid(const MultiplicitySpectrum& spec, const SampleGrid& grid) {
  const auto big_n = spec.total_words();
  if (big_n == 0) fail(ErrorCode::EmptyText, "empty spectrum");
  for (const auto n : grid.points()) {
    if (n < 1 || n > big_n) {
      fail(ErrorCode::Domain, "grid point " + std::to_string(n) + " outside [1, " +
                                  std::to_string(big_n) + "]");
    }
  }
}

// Precomputed pieces shared by every grid point.
class RatioTable {
 public:
  RatioTable(const MultiplicitySpectrum& spec, bool with_pairs) : spec_(spec) {
    big_n_ = spec.total_words();
    kmax_ = spec.max_multiplicity();
    // Covariances need B at m_r + m_s, at most twice the largest multiplicity.
    if (with_pairs) kmax_ *= 2;
    kmax_ = std::min(kmax_, big_n_);
    reciprocal_.resize(kmax_);
    for (std::uint64_t j = 0; j < kmax_; ++j) {
      reciprocal_[j] = 1.0L / static_cast<long double>(big_n_ - j);
    }
  }

  // Fills ratios[k] = B_N(k, n) for k in [0, kmax]; returns the first k from
  // which every ratio is zero or negligible.
  std::uint64_t fill(std::uint64_t n, std::vector<long double>& ratios) const {
    ratios.resize(kmax_ + 1);
    ratios[0] = 1.0L;
    const std::uint64_t remaining = big_n_ - n;
    long double b = 1.0L;
    for (std::uint64_t k = 1; k <= kmax_; ++k) {
      // Factor (N - n - (k-1)) / (N - (k-1)) vanishes once k - 1 = N - n.
      if (k - 1 >= remaining) return k;
      b *= static_cast<long double>(remaining - (k - 1)) * reciprocal_[k - 1];
      if (b < detail::kNegligibleRatio) return k;
      ratios[k] = b;
    }
    return kmax_ + 1;
  }

  // Σ c_m B(m, n) for the ratios produced by fill().
  long double absent_types(const std::vector<long double>& ratios, std::uint64_t limit) const {
    long double sum = 0.0L;
    for (const auto& e : spec_.entries()) {
      if (e.multiplicity >= limit) break;
      sum += static_cast<long double>(e.types) * ratios[e.multiplicity];
    }
    return sum;
  }

  // Σ_r Var[1{r absent}] + Σ_{r≠s} Cov[1{r absent}, 1{s absent}], one term
  // per pair of multiplicity classes. Each covariance B(a+b) - B(a)B(b) is
  // small, so nothing of order V² is ever formed and cancelled.
  long double absence_variance(const std::vector<long double>& ratios, std::uint64_t limit) const {
    const auto entries = spec_.entries();
    const auto at = [&](std::uint64_t k) { return k < limit ? ratios[k] : 0.0L; };
    long double sum = 0.0L;
    for (std::size_t a = 0; a < entries.size(); ++a) {
      const auto ma = entries[a].multiplicity;
      const long double ba = at(ma);
      // Ratios fall with m, so every later class is absent-with-zero too.
      if (ba == 0.0L) break;
      const auto ca = static_cast<long double>(entries[a].types);
      long double row = ca * ba * (1.0L - ba);
      if (entries[a].types > 1) row += ca * (ca - 1.0L) * (at(2 * ma) - ba * ba);
      long double cross = 0.0L;
      for (std::size_t b = a + 1; b < entries.size(); ++b) {
        const auto mb = entries[b].multiplicity;
        const long double bb = at(mb);
        if (bb == 0.0L) break;
        cross += static_cast<long double>(entries[b].types) * (at(ma + mb) - ba * bb);
      }
      sum += row + 2.0L * ca * cross;
    }
    return sum;
  }

  std::uint64_t kmax() const { return kmax_; }

 private:
  const MultiplicitySpectrum& spec_;
  std::uint64_t big_n_ = 0;
  std::uint64_t kmax_ = 0;
  std::vector<long double> reciprocal_;
};

// Mean along consecutive grid points by stepping n, O(N·M) in total:
// B(m, t+1) = B(m, t) · (N - m - t) / (N - t).
void walk_mean(const MultiplicitySpectrum& spec, const SampleGrid& grid, std::size_t begin,
               std::size_t end, std::vector<double>& out) {
  if (begin >= end) return;
  const auto big_n = spec.total_words();
  const auto entries = spec.entries();
  const auto vocab = static_cast<long double>(spec.vocabulary_size());
  std::vector<long double> ratios(entries.size());
  {
    const RatioTable table(spec, false);
    std::vector<long double> seed;
    const auto limit = table.fill(grid[begin], seed);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      ratios[i] = entries[i].multiplicity < limit ? seed[entries[i].multiplicity] : 0.0L;
    }
  }
  std::uint64_t at = grid[begin];
  for (std::size_t g = begin; g < end; ++g) {
    for (; at < grid[g]; ++at) {
      const long double inv = 1.0L / static_cast<long double>(big_n - at);
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto m = entries[i].multiplicity;
        ratios[i] = (at + m >= big_n) ? 0.0L : ratios[i] * static_cast<long double>(big_n - m - at) * inv;
      }
    }
    long double absent = 0.0L;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      absent += static_cast<long double>(entries[i].types) * ratios[i];
    }
    out[g] = static_cast<double>(vocab - absent);
  }
}

}  // namespace

bool deterministic_point(const MultiplicitySpectrum& spec, std::uint64_t n) {
  const auto big_n = spec.total_words();
  const auto vocab = spec.vocabulary_size();
  return n <= 1 || vocab == 1 || vocab == big_n || n > big_n - spec.min_multiplicity();
}

std::vector<double> mean_curve(const MultiplicitySpectrum& spec, const SampleGrid& grid,
                               unsigned threads) {
  check_grid(spec, grid);
  std::vector<double> mean(grid.size());
  const auto big_n = spec.total_words();
  const auto per_point = static_cast<long double>(spec.max_multiplicity());
  const auto walking = static_cast<long double>(big_n) * static_cast<long double>(spec.distinct_multiplicities());
  if (per_point * static_cast<long double>(grid.size()) > walking) {
    for_blocks(grid.size(), threads,
               [&](std::size_t begin, std::size_t end) { walk_mean(spec, grid, begin, end, mean); });
    return mean;
  }
  const RatioTable table(spec, false);
  const auto vocab = static_cast<long double>(spec.vocabulary_size());
  for_blocks(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<long double> ratios;
    for (std::size_t g = begin; g < end; ++g) {
      const auto limit = table.fill(grid[g], ratios);
      mean[g] = static_cast<double>(vocab - table.absent_types(ratios, limit));
    }
  });
  return mean;
}

std::vector<double> variance_curve(const MultiplicitySpectrum& spec, const SampleGrid& grid,
                                   unsigned threads) {
  check_grid(spec, grid);
  std::vector<double> variance(grid.size());
  const RatioTable table(spec, true);
  for_blocks(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<long double> ratios;
    for (std::size_t g = begin; g < end; ++g) {
      const auto n = grid[g];
      if (deterministic_point(spec, n)) {
        variance[g] = 0.0;
        continue;
      }
      // v(n) = V - X with X the number of absent types.
      const auto limit = table.fill(n, ratios);
      const auto value = static_cast<double>(table.absence_variance(ratios, limit));
      if (value < detail::kVarianceRoundingFloor) {
        std::ostringstream msg;
        msg << std::setprecision(17) << "variance " << value << " at n=" << n
            << " is below the rounding floor";
        fail(ErrorCode::Numerics, msg.str());
      }
      variance[g] = std::max(value, 0.0);
    }
  });
  return variance;
}

EnsembleCurve ensemble_curve(const MultiplicitySpectrum& spec, const SampleGrid& grid, unsigned threads) {
  return {grid, mean_curve(spec, grid, threads), variance_curve(spec, grid, threads)};
}

void write_csv(std::ostream& out, const EnsembleCurve& curve) {
  out << "n,mean,variance\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << curve.grid[i] << ',' << curve.mean[i] << ',' << curve.variance[i] << '\n';
  }
}

}  // namespace heaps
