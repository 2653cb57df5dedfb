#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "heaps/rarefaction.hpp"
#include "heaps/text_model.hpp"

namespace heaps {

// Empirical Heaps function v(n), n = 1..N, split by owning class.
struct HeapsCurve {
  std::vector<std::uint32_t> values;
  PerClass<std::vector<std::uint32_t>> per_class;
  std::uint64_t vocabulary = 0;
  PerClass<std::uint64_t> vocabulary_per_class{};

  std::uint64_t total_words() const { return values.size(); }
  std::uint32_t at(std::uint64_t n) const { return values[n - 1]; }
  std::uint32_t at(TagClass tag, std::uint64_t n) const { return per_class[index(tag)][n - 1]; }
};

HeapsCurve empirical_heaps(const TextRecord& text);

// Location and value of an extremum along the grid.
struct Extremum {
  double value = 0.0;
  std::uint64_t n = 0;
};

// Equal-weight statistics over the points they are taken on. `sd` divides by
// the number of points.
struct SeriesSummary {
  double mean = 0.0;
  double sd = 0.0;
  Extremum max;
  Extremum min;
  std::size_t points = 0;
};

SeriesSummary summarize(const std::vector<std::uint64_t>& grid, const std::vector<double>& values);

struct AnomalyReport {
  SampleGrid grid;
  std::vector<double> delta;                      // Δ(n) = v(n) - v̄(n)
  std::vector<std::optional<double>> rel_delta;  // δ(n) = Δ/σ_v, absent where σ_v = 0
  SeriesSummary absolute;                         // ⟨Δ⟩, σ_Δ, Δ_max, Δ_min over all points
  SeriesSummary relative;                         // ⟨δ⟩, σ_δ over points where δ is defined
  bool grid_statistics = false;                   // true unless the grid is full
};

AnomalyReport anomaly(const HeapsCurve& curve, const EnsembleCurve& ensemble);
AnomalyReport anomaly(const TextRecord& text, const EnsembleCurve& ensemble);

struct ExcessReport {
  SampleGrid grid;
  PerClass<std::vector<double>> excess;  // E_tag(n)
  PerClass<SeriesSummary> summary;
  // Largest |E_tag - (Δ_tag - (V_tag/V) Δ)| seen, when an ensemble was given.
  std::optional<double> identity_residual;
};

// E_tag(n) = v_tag(n) - (V_tag/V) v(n) on `grid`.
ExcessReport excess(const HeapsCurve& curve, const SampleGrid& grid,
                    const EnsembleCurve* ensemble = nullptr);
ExcessReport excess(const TextRecord& text, const HeapsCurve& curve, const SampleGrid& grid,
                    const EnsembleCurve* ensemble = nullptr);

// Δ_tag(n) = v_tag(n) - (V_tag/V) v̄(n).
std::vector<double> tag_anomaly(const HeapsCurve& curve, const EnsembleCurve& ensemble, TagClass tag);

}  // namespace heaps
