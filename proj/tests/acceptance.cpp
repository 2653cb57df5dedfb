// Acceptance gate. One PASS/FAIL line per criterion, each with its
// tolerance; exits nonzero if any criterion fails. The corpus profile runs
// only when HEAPS_CORPUS_MANIFEST names a manifest of ingested texts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>

#include "heaps/analysis.hpp"
#include "heaps/error.hpp"
#include "heaps/oracle.hpp"
#include "heaps/rarefaction.hpp"
#include "heaps/report.hpp"
#include "support.hpp"

using namespace heaps;

namespace {

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void verdict(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Runs `body`, turning an escaped exception into a FAIL line.
void guarded(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    verdict(name, false, std::string("exception: ") + e.what());
  }
}

void exhaustive_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const auto check = check_partitions(8);
  const double elapsed = seconds_since(start);
  const double worst = std::max(check.max_mean_deviation, check.max_variance_deviation);
  verdict("exhaustive_oracle", worst <= 1e-12 && elapsed < 10.0,
          fmt("%zu partitions of N <= 8, max |dev| %.3g (tol 1e-12), %.2f s (limit 10 s)", check.cases, worst,
              elapsed));
}

void monte_carlo_consistency() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  const auto text = heaps::testing::random_text(rng, heaps::testing::zipf_counts(5000, 50000), false);
  const auto grid = SampleGrid::count(text.total_words(), 1000);
  const auto mc = monte_carlo_oracle(text, 10000, 314159, grid);
  const auto check = check_monte_carlo(spectrum(text), mc);
  const double elapsed = seconds_since(start);
  verdict("monte_carlo",
          *check.mean_within >= 0.99 && *check.variance_within >= 0.99 && elapsed < 60.0,
          fmt("N = %llu, 1e4 shuffles, seed 314159; mean within 5 sigma/sqrt(S) at %.1f%%, variance within 3 SE "
              "at %.1f%% (need >= 99%% of %zu points), %.2f s (limit 60 s)",
              static_cast<unsigned long long>(text.total_words()), 100.0 * *check.mean_within,
              100.0 * *check.variance_within, check.points, elapsed));
}

void table1_fit() {
  const auto start = std::chrono::steady_clock::now();
  const auto report = aggregate(table_summaries(read_table1(HEAPS_FIXTURE_DIR "/table1.csv")));
  const double elapsed = seconds_since(start);
  const auto* h = report.find("heaps_V_vs_N");
  if (h == nullptr || !h->fit) {
    verdict("table1_h", false, "Heaps fit missing");
    return;
  }
  const double slope = h->fit->slope.value;
  const double r = h->fit->pearson_r;
  verdict("table1_h", std::abs(slope - 0.68) <= 0.01 && h->n_points == 74,
          fmt("h = %.4f +- %.4f over %zu rows (need 0.68 +- 0.01)", slope, h->fit->slope.std_error, h->n_points));
  verdict("table1_r", r >= 0.99, fmt("r = %.6f (need >= 0.99; %.2f to two places)", r, r));
  verdict("table1_runtime", elapsed < 1.0, fmt("%.4f s (limit 1 s)", elapsed));
}

void invariant_suite() {
  constexpr int kCases = 1000;
  std::mt19937_64 rng(424242);
  int bad_endpoints = 0, bad_steps = 0, bad_sums = 0, bad_identity = 0, bad_collapse = 0;
  double worst_identity = 0.0, worst_collapse = 0.0;
  for (int trial = 0; trial < kCases; ++trial) {
    const auto counts = heaps::testing::random_counts(rng, 150, 30);
    const auto text = heaps::testing::random_text(rng, counts);
    const auto spec = spectrum(text);
    const auto big_n = text.total_words();
    const auto grid = trial % 2 == 0 ? SampleGrid::full(big_n) : SampleGrid::count(big_n, 41);
    const auto curve = empirical_heaps(text);
    const auto ens = ensemble_curve(spec, grid);
    const double vocab = static_cast<double>(spec.vocabulary_size());

    const auto a = anomaly(curve, ens);
    const bool endpoints = std::abs(ens.mean.front() - 1.0) <= 1e-12 && std::abs(ens.mean.back() - vocab) <= 1e-12 * vocab &&
                           ens.variance.front() == 0.0 && ens.variance.back() == 0.0 &&
                           std::abs(a.delta.front()) <= 1e-12 && std::abs(a.delta.back()) <= 1e-12 * vocab;
    bad_endpoints += endpoints ? 0 : 1;

    bool steps = curve.values.front() == 1;
    for (std::size_t i = 1; i < curve.values.size(); ++i) {
      const auto step = curve.values[i] - curve.values[i - 1];
      steps = steps && (step == 0 || step == 1);
    }
    for (const auto& series : curve.per_class) {
      for (std::size_t i = 1; i < series.size(); ++i) {
        const auto step = series[i] - series[i - 1];
        steps = steps && (step == 0 || step == 1);
      }
    }
    bad_steps += steps ? 0 : 1;

    const auto e = excess(text, curve, grid, &ens);
    bool sums = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double total = 0.0;
      for (const auto& series : e.excess) total += series[i];
      sums = sums && std::abs(total) <= 1e-12 * vocab;
    }
    bad_sums += sums ? 0 : 1;
    worst_identity = std::max(worst_identity, *e.identity_residual);
    bad_identity += *e.identity_residual <= 1e-9 ? 0 : 1;

    // Pair-sum check on a separate spectrum with V <= 200.
    const auto small = heaps::testing::random_counts(rng, 200, 25);
    const auto small_spec = MultiplicitySpectrum::from_counts(small);
    std::uniform_int_distribution<std::uint64_t> pick(1, small_spec.total_words());
    const auto points = SampleGrid::explicit_points(small_spec.total_words(), {pick(rng), pick(rng)});
    const auto variance = variance_curve(small_spec, points);
    bool collapse = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double dev = std::abs(variance[i] - static_cast<double>(heaps::testing::naive_variance(small, points[i])));
      worst_collapse = std::max(worst_collapse, dev);
      collapse = collapse && dev <= 1e-10;
    }
    bad_collapse += collapse ? 0 : 1;
  }
  verdict("invariants",
          bad_endpoints + bad_steps + bad_sums + bad_identity + bad_collapse == 0,
          fmt("%d random cases; failing cases: endpoints %d (tol 1e-12), v-steps %d, sum E %d (tol 1e-12 V), "
              "identity %d (max %.3g, tol 1e-9), pair sum %d (max %.3g, tol 1e-10)",
              kCases, bad_endpoints, bad_steps, bad_sums, bad_identity, worst_identity, bad_collapse, worst_collapse));
}

void performance() {
  const auto spec = MultiplicitySpectrum::from_counts(heaps::testing::zipf_counts(22000, 350000));
  const auto grid = SampleGrid::count(spec.total_words(), 1000);
  const auto start = std::chrono::steady_clock::now();
  const auto variance = variance_curve(spec, grid, 1);
  const double elapsed = seconds_since(start);
  verdict("performance", elapsed <= 30.0 && variance.size() == 1000,
          fmt("variance_curve N = %llu, V = %llu, M = %zu, 1000 points, 1 thread: %.2f s (limit 30 s)",
              static_cast<unsigned long long>(spec.total_words()),
              static_cast<unsigned long long>(spec.vocabulary_size()), spec.entries().size(), elapsed));
}

void corpus_profile() {
  const char* manifest = std::getenv("HEAPS_CORPUS_MANIFEST");
  if (manifest == nullptr || *manifest == '\0') {
    std::printf("SKIP corpus_profile: HEAPS_CORPUS_MANIFEST not set\n");
    return;
  }
  AnalysisOptions options;
  const auto report = analyze_corpus(read_manifest(manifest), options, std::nullopt);
  verdict("corpus_works", report.failures.empty(),
          fmt("%zu works analyzed, %zu failed", report.rows.size(), report.failures.size()));

  const auto slope_check = [&](const char* name, const char* fit, double expected) {
    const auto* f = report.find(fit);
    if (f == nullptr || !f->fit) {
      verdict(name, false, fmt("%s not computed", fit));
      return;
    }
    const double s = f->fit->slope.value;
    verdict(name, std::abs(s - expected) <= 0.05, fmt("slope %.4f (need %.2f +- 0.05)", s, expected));
  };
  slope_check("corpus_sd_rel_exponent", "sd_rel_vs_V", 0.29);
  slope_check("corpus_sd_abs_exponent", "sd_abs_vs_V", 0.83);

  const auto ratio_check = [&](const std::string& fit, double expected) {
    const auto* f = report.find(fit);
    if (f == nullptr || !f->ratio) {
      verdict("corpus_" + fit, false, "ratio not computed");
      return;
    }
    const double value = f->ratio->value;
    verdict("corpus_" + fit, std::abs(value - expected) <= 0.02, fmt("%.4f (need %.3f +- 0.02)", value, expected));
  };
  ratio_check("alpha_noun", 0.313);
  ratio_check("alpha_verb", 0.186);
  ratio_check("alpha_other", 0.501);
  ratio_check("beta_noun", 0.47);
  ratio_check("beta_verb", 0.28);
  ratio_check("beta_other", 0.247);

  std::size_t with_curves = 0, negative = 0, large = 0, verb_negative = 0, other_positive = 0;
  for (const auto& row : report.rows) {
    if (!row.curves) continue;
    ++with_curves;
    negative += row.curves->relative.mean < 0.0 ? 1 : 0;
    if (row.vocabulary >= 4000) {
      ++large;
      verb_negative += row.curves->excess[static_cast<std::size_t>(TagClass::Verb)].mean < 0.0 ? 1 : 0;
      other_positive += row.curves->excess[static_cast<std::size_t>(TagClass::Other)].mean > 0.0 ? 1 : 0;
    }
  }
  const auto share = [](std::size_t k, std::size_t n) { return n == 0 ? 0.0 : static_cast<double>(k) / n; };
  verdict("corpus_mean_rel_negative", share(negative, with_curves) >= 0.90,
          fmt("<delta> < 0 in %zu of %zu works (need >= 90%%)", negative, with_curves));
  verdict("corpus_excess_verb_negative", share(verb_negative, large) >= 0.75,
          fmt("mean E_verb < 0 in %zu of %zu works with V >= 4000 (need >= 75%%)", verb_negative, large));
  verdict("corpus_excess_other_positive", share(other_positive, large) >= 0.75,
          fmt("mean E_other > 0 in %zu of %zu works with V >= 4000 (need >= 75%%)", other_positive, large));
}

}  // namespace

int main() {
  guarded("exhaustive_oracle", exhaustive_equivalence);
  guarded("monte_carlo", monte_carlo_consistency);
  guarded("table1", table1_fit);
  guarded("invariants", invariant_suite);
  guarded("performance", performance);
  guarded("corpus_profile", corpus_profile);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
