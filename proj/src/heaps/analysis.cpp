#include "heaps/analysis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "heaps/error.hpp"

namespace heaps {

namespace {
constexpr double kIdentityTolerance = 1e-9;
}

HeapsCurve empirical_heaps(const TextRecord& text) {
  const auto tokens = text.tokens();
  const auto types = text.types();
  HeapsCurve curve;
  curve.values.resize(tokens.size());
  for (auto& v : curve.per_class) v.resize(tokens.size());

  std::vector<bool> seen(types.size(), false);
  std::uint32_t distinct = 0;
  PerClass<std::uint32_t> distinct_per_class{};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto type = tokens[i].type;
    if (!seen[type]) {
      seen[type] = true;
      ++distinct;
      ++distinct_per_class[index(types[type].tag)];
    }
    curve.values[i] = distinct;
    for (std::size_t c = 0; c < kNumWordClasses; ++c) curve.per_class[c][i] = distinct_per_class[c];
  }
  curve.vocabulary = types.size();
  for (std::size_t c = 0; c < kNumWordClasses; ++c) curve.vocabulary_per_class[c] = text.vocabulary_per_class()[c];
  return curve;
}

SeriesSummary summarize(const std::vector<std::uint64_t>& grid, const std::vector<double>& values) {
  SeriesSummary s;
  s.points = values.size();
  if (values.empty()) return s;
  long double sum = 0.0L;
  s.max = {-std::numeric_limits<double>::infinity(), 0};
  s.min = {std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (values[i] > s.max.value) s.max = {values[i], grid[i]};
    if (values[i] < s.min.value) s.min = {values[i], grid[i]};
  }
  const long double mean = sum / static_cast<long double>(values.size());
  long double squares = 0.0L;
  for (const double v : values) squares += (v - mean) * (v - mean);
  s.mean = static_cast<double>(mean);
  s.sd = static_cast<double>(std::sqrt(squares / static_cast<long double>(values.size())));
  return s;
}

AnomalyReport anomaly(const HeapsCurve& curve, const EnsembleCurve& ensemble) {
  const auto& grid = ensemble.grid;
  if (grid.total_words() != curve.total_words() || ensemble.mean.size() != grid.size() ||
      ensemble.variance.size() != grid.size()) {
    fail(ErrorCode::GridMismatch, "ensemble grid covers N=" + std::to_string(grid.total_words()) +
                                      " but the text has N=" + std::to_string(curve.total_words()));
  }
  AnomalyReport report{grid, {}, {}, {}, {}, !grid.is_full()};
  report.delta.resize(grid.size());
  report.rel_delta.resize(grid.size());
  std::vector<std::uint64_t> defined_at;
  std::vector<double> defined;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double delta = static_cast<double>(curve.at(grid[i])) - ensemble.mean[i];
    report.delta[i] = delta;
    if (ensemble.variance[i] > 0.0) {
      const double rel = delta / std::sqrt(ensemble.variance[i]);
      report.rel_delta[i] = rel;
      defined_at.push_back(grid[i]);
      defined.push_back(rel);
    }
  }
  report.absolute = summarize(grid.points(), report.delta);
  report.relative = summarize(defined_at, defined);
  return report;
}

AnomalyReport anomaly(const TextRecord& text, const EnsembleCurve& ensemble) {
  return anomaly(empirical_heaps(text), ensemble);
}

std::vector<double> tag_anomaly(const HeapsCurve& curve, const EnsembleCurve& ensemble, TagClass tag) {
  const auto& grid = ensemble.grid;
  if (grid.total_words() != curve.total_words()) {
    fail(ErrorCode::GridMismatch, "ensemble grid does not belong to this text");
  }
  const double share = static_cast<double>(curve.vocabulary_per_class[index(tag)]) /
                       static_cast<double>(curve.vocabulary);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out[i] = static_cast<double>(curve.at(tag, grid[i])) - share * ensemble.mean[i];
  }
  return out;
}

ExcessReport excess(const HeapsCurve& curve, const SampleGrid& grid, const EnsembleCurve* ensemble) {
  if (grid.total_words() != curve.total_words()) {
    fail(ErrorCode::GridMismatch, "grid does not belong to this text");
  }
  const auto vocab = static_cast<std::int64_t>(curve.vocabulary);
  ExcessReport report{grid, {}, {}, std::nullopt};
  for (std::size_t c = 0; c < kNumWordClasses; ++c) {
    const auto v_tag = static_cast<std::int64_t>(curve.vocabulary_per_class[c]);
    auto& e = report.excess[c];
    e.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      // Integer numerators sum to zero across classes exactly.
      const std::int64_t numerator = vocab * static_cast<std::int64_t>(curve.per_class[c][grid[i] - 1]) -
                                     v_tag * static_cast<std::int64_t>(curve.at(grid[i]));
      e[i] = static_cast<double>(numerator) / static_cast<double>(vocab);
    }
    report.summary[c] = summarize(grid.points(), e);
  }

  if (ensemble != nullptr) {
    if (!(ensemble->grid == grid)) fail(ErrorCode::GridMismatch, "ensemble grid differs from excess grid");
    double worst = 0.0;
    for (const TagClass tag : kWordClasses) {
      const auto c = index(tag);
      const auto tag_delta = tag_anomaly(curve, *ensemble, tag);
      const double share = static_cast<double>(curve.vocabulary_per_class[c]) / static_cast<double>(vocab);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double delta = static_cast<double>(curve.at(grid[i])) - ensemble->mean[i];
        worst = std::max(worst, std::abs(report.excess[c][i] - (tag_delta[i] - share * delta)));
      }
    }
    report.identity_residual = worst;
    if (worst > kIdentityTolerance) {
      std::ostringstream msg;
      msg << "Heaps excess identity violated by " << worst;
      fail(ErrorCode::Numerics, msg.str());
    }
  }
  return report;
}

ExcessReport excess(const TextRecord& text, const HeapsCurve& curve, const SampleGrid& grid,
                    const EnsembleCurve* ensemble) {
  if (curve.total_words() != text.total_words() || curve.vocabulary != text.vocabulary_size()) {
    fail(ErrorCode::GridMismatch, "Heaps curve was not built from this text");
  }
  return excess(curve, grid, ensemble);
}

}  // namespace heaps
