#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "heaps/error.hpp"
#include "heaps/rarefaction.hpp"
#include "support.hpp"

using namespace heaps;

namespace {

// Exact C(N-m, n)/C(N, n) for small N by integer binomials.
long double exact_ratio(std::uint64_t big_n, std::uint64_t m, std::uint64_t n) {
  const auto choose = [](std::uint64_t a, std::uint64_t b) -> unsigned __int128 {
    if (b > a) return 0;
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  return static_cast<long double>(choose(big_n - m, n)) / static_cast<long double>(choose(big_n, n));
}

struct Reference {
  std::uint64_t n;
  long double mean;
  long double variance;
};

// tests/oracles/reference_values.py, 60-digit mpmath.
const Reference kZipf5000[] = {
    {2, 1.9781009636192723854L, 0.021419468586323182933L},
    {10, 9.2015642920564923793L, 0.81270122674598854334L},
    {1000, 444.0283341994291893L, 181.17123530919843129L},
    {25000, 3612.0423030872000418L, 720.75433336547116711L},
    {49000, 4957.192501183432892L, 40.130916179744997549L},
    {49990, 4999.575765436543588L, 0.40616101654002732462L},
};
const Reference kZipf22000[] = {
    {2, 1.9842936924146313887L, 0.015459619487402403681L},
    {100, 75.792887406412424559L, 18.507554299330011487L},
    {20000, 5233.3630241055582381L, 2212.9799601666265662L},
    {175000, 17602.84227364947178L, 2617.1861619808298554L},
    {349000, 21985.933465732051487L, 13.827904627291375683L},
};

void check_reference(std::uint64_t vocabulary, std::uint64_t total, std::span<const Reference> refs) {
  const auto counts = heaps::testing::zipf_counts(vocabulary, total);
  const auto spec = MultiplicitySpectrum::from_counts(counts);
  std::vector<std::uint64_t> points;
  for (const auto& r : refs) points.push_back(r.n);
  const auto grid = SampleGrid::explicit_points(total, points);
  const auto curve = ensemble_curve(spec, grid, 1);
  for (const auto& r : refs) {
    const auto it = std::find(grid.points().begin(), grid.points().end(), r.n);
    const auto i = static_cast<std::size_t>(it - grid.points().begin());
    CAPTURE(r.n);
    CHECK(std::abs(curve.mean[i] - static_cast<double>(r.mean)) <= 1e-11);
    CHECK(std::abs(curve.variance[i] - static_cast<double>(r.variance)) <= 1e-10);
  }
}

}  // namespace

TEST_CASE("grid specs") {
  CHECK(GridSpec::parse("full").mode == GridMode::Full);
  const auto c = GridSpec::parse("count:250");
  CHECK(c.mode == GridMode::Count);
  CHECK(c.count == 250);
  CHECK(c.label() == "count:250");
  for (const char* bad : {"count:1", "count:", "count:x", "half", "count:10x"}) {
    CHECK_THROWS_AS(GridSpec::parse(bad), Error);
  }
}

TEST_CASE("sample grids hold 1 and N and are strictly increasing") {
  const auto g = SampleGrid::count(100000, 1000);
  CHECK(g.size() == 1000);
  CHECK(g[0] == 1);
  CHECK(g[g.size() - 1] == 100000);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK_FALSE(g.is_full());

  const auto small = SampleGrid::count(10, 1000);
  CHECK(small.is_full());
  CHECK(small.size() == 10);

  const auto e = SampleGrid::explicit_points(50, {7, 3, 7});
  CHECK(e.points() == std::vector<std::uint64_t>{1, 3, 7, 50});
  CHECK_THROWS_AS(SampleGrid::explicit_points(50, {51}), Error);
  CHECK_THROWS_AS(SampleGrid::full(0), Error);
}

TEST_CASE("binomial tail ratio small cases") {
  CHECK(binomial_tail_ratio(3, 2, 2) == 0.0);
  CHECK(binomial_tail_ratio(3, 1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(binomial_tail_ratio(3, 1, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (std::uint64_t big_n = 1; big_n <= 12; ++big_n) {
    for (std::uint64_t m = 1; m <= big_n; ++m) {
      CHECK(binomial_tail_ratio(big_n, m, 0) == 1.0);
    }
  }
  CHECK_THROWS_AS(binomial_tail_ratio(3, 0, 1), Error);
  CHECK_THROWS_AS(binomial_tail_ratio(3, 4, 1), Error);
  CHECK_THROWS_AS(binomial_tail_ratio(3, 1, 4), Error);
}

TEST_CASE("binomial tail ratio against exact integer binomials") {
  for (std::uint64_t big_n = 1; big_n <= 60; ++big_n) {
    for (std::uint64_t m = 1; m <= big_n; ++m) {
      for (std::uint64_t n = 0; n <= big_n; ++n) {
        const auto exact = exact_ratio(big_n, m, n);
        CHECK(std::abs(binomial_tail_ratio(big_n, m, n) - static_cast<double>(exact)) <=
              1e-15 * std::max(1.0L, exact));
      }
    }
  }
}

TEST_CASE("binomial tail ratio against log-gamma at large N") {
  const std::uint64_t big_n = 1000000;
  for (const std::uint64_t m : {1ull, 7ull, 300ull, 20000ull}) {
    for (const std::uint64_t n : {1ull, 50ull, 1000ull, 400000ull, 999000ull}) {
      if (n + m > big_n) continue;
      const long double log_ratio = std::lgamma(static_cast<long double>(big_n - m + 1)) -
                                    std::lgamma(static_cast<long double>(big_n - m - n + 1)) -
                                    std::lgamma(static_cast<long double>(big_n + 1)) +
                                    std::lgamma(static_cast<long double>(big_n - n + 1));
      const double expected = static_cast<double>(std::exp(log_ratio));
      CAPTURE(m);
      CAPTURE(n);
      // lgammal loses ~1e-13 relative at these arguments.
      CHECK(binomial_tail_ratio(big_n, m, n) == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("curves of the three-word text a a b") {
  const auto spec = MultiplicitySpectrum::from_entries({{2, 1}, {1, 1}});
  const auto curve = ensemble_curve(spec, SampleGrid::full(3));
  CHECK(curve.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(curve.mean[1] - 5.0 / 3.0) <= 1e-15);
  CHECK(curve.mean[2] == 2.0);
  CHECK(std::abs(curve.variance[1] - 2.0 / 9.0) <= 1e-15);
  CHECK(curve.variance[0] == 0.0);
  CHECK(curve.variance[2] == 0.0);
}

TEST_CASE("trivial spectra") {
  const auto distinct = MultiplicitySpectrum::from_entries({{1, 40}});
  const auto d = ensemble_curve(distinct, SampleGrid::full(40));
  for (std::size_t i = 0; i < 40; ++i) {
    CHECK(std::abs(d.mean[i] - static_cast<double>(i + 1)) <= 1e-12);
    CHECK(d.variance[i] == 0.0);
  }
  const auto single = MultiplicitySpectrum::from_entries({{3, 1}});
  const auto s = ensemble_curve(single, SampleGrid::full(3));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(s.mean[i] == 1.0);
    CHECK(s.variance[i] == 0.0);
  }
  const auto pair = MultiplicitySpectrum::from_entries({{1, 2}});
  const auto p = ensemble_curve(pair, SampleGrid::full(2));
  CHECK(p.mean == std::vector<double>{1.0, 2.0});
  CHECK(p.variance == std::vector<double>{0.0, 0.0});
}

TEST_CASE("mini fixture spectrum against exact fractions") {
  // Exact rationals from tests/oracles/reference_values.py.
  const auto spec = MultiplicitySpectrum::from_entries({{1, 4}, {2, 3}, {3, 1}, {4, 1}});
  const auto grid = SampleGrid::explicit_points(17, {2, 5, 8, 16});
  const auto c = ensemble_curve(spec, grid);
  const double mean[] = {1.0, 65.0 / 34.0, 997.0 / 238.0, 201.0 / 34.0, 149.0 / 17.0, 9.0};
  const double var[] = {0.0, 93.0 / 1156.0, 358759.0 / 736372.0, 126111.0 / 165308.0, 52.0 / 289.0, 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CAPTURE(grid[i]);
    CHECK(std::abs(c.mean[i] - mean[i]) <= 1e-13);
    CHECK(std::abs(c.variance[i] - var[i]) <= 1e-13);
  }
}

TEST_CASE("high-precision reference: Zipf-like N=5e4") {
  check_reference(5000, 50000, kZipf5000);
}

TEST_CASE("high-precision reference: Zipf-like N=3.5e5") {
  check_reference(22000, 350000, kZipf22000);
}

TEST_CASE("collapsed variance equals the naive item-pair sum") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 40; ++trial) {
    const auto counts = heaps::testing::random_counts(rng, 200, 40);
    const auto spec = MultiplicitySpectrum::from_counts(counts);
    const auto grid = SampleGrid::count(spec.total_words(), 25);
    const auto v = variance_curve(spec, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto naive = static_cast<double>(heaps::testing::naive_variance(counts, grid[i]));
      CHECK(std::abs(v[i] - naive) <= 1e-11);
    }
  }
}

TEST_CASE("results do not depend on the thread count") {
  const auto counts = heaps::testing::zipf_counts(3000, 30000);
  const auto spec = MultiplicitySpectrum::from_counts(counts);
  const auto grid = SampleGrid::count(spec.total_words(), 500);
  const auto one = ensemble_curve(spec, grid, 1);
  const auto many = ensemble_curve(spec, grid, 7);
  CHECK(one.mean == many.mean);
  CHECK(one.variance == many.variance);
}

TEST_CASE("full-grid mean walk agrees with per-point evaluation") {
  const auto counts = heaps::testing::zipf_counts(400, 3000);
  const auto spec = MultiplicitySpectrum::from_counts(counts);
  const auto full = mean_curve(spec, SampleGrid::full(spec.total_words()));
  const auto sparse_grid = SampleGrid::count(spec.total_words(), 40);
  const auto sparse = mean_curve(spec, sparse_grid);
  for (std::size_t i = 0; i < sparse_grid.size(); ++i) {
    CHECK(std::abs(full[sparse_grid[i] - 1] - sparse[i]) <= 1e-10);
  }
}

TEST_CASE("deterministic points") {
  const auto spec = MultiplicitySpectrum::from_entries({{2, 3}, {5, 1}});
  CHECK(deterministic_point(spec, 1));
  CHECK_FALSE(deterministic_point(spec, 2));
  CHECK_FALSE(deterministic_point(spec, 9));
  CHECK(deterministic_point(spec, 10));
  CHECK(deterministic_point(spec, 11));
}

TEST_CASE("grid outside the spectrum is a domain error") {
  const auto spec = MultiplicitySpectrum::from_entries({{2, 1}});
  try {
    mean_curve(spec, SampleGrid::full(5));
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
}

TEST_CASE("ensemble csv") {
  const auto spec = MultiplicitySpectrum::from_entries({{2, 1}, {1, 1}});
  std::ostringstream out;
  write_csv(out, ensemble_curve(spec, SampleGrid::full(3)));
  CHECK(out.str().rfind("n,mean,variance\n1,1,0\n2,1.66666", 0) == 0);
}
