#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heaps/analysis.hpp"
#include "heaps/error.hpp"
#include "heaps/fitting.hpp"
#include "heaps/oracle.hpp"
#include "heaps/rarefaction.hpp"
#include "heaps/text_model.hpp"

namespace heaps {

struct AnalysisOptions {
  GridSpec grid{GridMode::Count, 1000};
  Normalization normalization = Normalization::Lower;
  std::optional<std::filesystem::path> tagmap;
  unsigned threads = 0;  // per-text numerics, 0 = hardware concurrency
  unsigned jobs = 0;     // concurrent works in a corpus run
  std::uint64_t seed = 0;
  Transform mean_rel_transform = Transform::LinLog;
};

TagMap resolve_tag_map(const AnalysisOptions& options);

// One row of the corpus report, everything downstream aggregation needs.
struct WorkSummary {
  std::string id;
  std::string title;
  std::uint64_t total_words = 0;
  std::uint64_t vocabulary = 0;
  bool suspect = false;

  // Absent for rows that only carry (N, V), e.g. the Table 1 fixture.
  std::optional<PerClass<std::uint64_t>> words_per_class;
  std::optional<PerClass<std::uint64_t>> vocabulary_per_class;

  struct Curves {
    std::string grid;
    bool grid_statistics = false;
    SeriesSummary absolute;
    SeriesSummary relative;
    PerClass<SeriesSummary> excess;
    double identity_residual = 0.0;
  };
  std::optional<Curves> curves;
};

struct WorkAnalysis {
  TextRecord text;
  HeapsCurve heaps;
  EnsembleCurve ensemble;
  AnomalyReport anomaly;
  ExcessReport excess;

  WorkSummary summary(std::string title = {}) const;
};

WorkAnalysis analyze_text(TextRecord text, const AnalysisOptions& options);
WorkAnalysis analyze_file(const std::filesystem::path& path, std::string id, const AnalysisOptions& options);

nlohmann::json to_json(const WorkSummary& summary);
WorkSummary summary_from_json(const nlohmann::json& doc);
nlohmann::json analysis_metadata(const AnalysisOptions& options, const TagMap& tag_map);

// Columns n,v,mean,sd,delta,rel_delta,E_noun,E_verb,E_other.
void write_curves_csv(std::ostream& out, const WorkAnalysis& analysis);

// Writes <id>.json, <id>.curves.csv and <id>.ensemble.csv into `dir`.
void write_work_outputs(const std::filesystem::path& dir, const WorkAnalysis& analysis,
                        const nlohmann::json& doc);

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  std::string title;
};

// `id<TAB>path<TAB>title` per line; relative paths resolve against the
// manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base);

struct Table1Row {
  std::string code;
  std::string author;
  std::string title;
  std::string year;
  std::uint64_t total_words = 0;
  std::uint64_t vocabulary = 0;
  bool suspect = false;
};

// CSV with header `code,author,title,year,N,V`. `# suspect: code[,code]`
// comment lines flag rows; rows with V > N are flagged automatically.
std::vector<Table1Row> read_table1(const std::filesystem::path& path);
std::vector<Table1Row> parse_table1(std::istream& in);
std::vector<WorkSummary> table_summaries(const std::vector<Table1Row>& rows);

struct CorpusFit {
  std::string name;
  std::string x;
  std::string y;
  std::string kind;    // loglog | linlin | linlog | proportional
  std::string filter;  // which rows took part
  std::size_t n_points = 0;
  std::optional<FitResult> fit;
  std::optional<Estimate> ratio;
  std::optional<std::string> omitted;  // reason the fit was not computed
};

struct WorkFailure {
  std::string id;
  std::string error;
  std::string message;
};

struct CorpusReport {
  std::vector<WorkSummary> rows;
  std::vector<CorpusFit> fits;
  std::map<std::string, double> diagnostics;
  std::vector<WorkFailure> failures;

  const CorpusFit* find(const std::string& name) const;
};

// Pure fold over per-work rows, in the given order.
CorpusReport aggregate(const std::vector<WorkSummary>& rows, Transform mean_rel_transform = Transform::LinLog);

CorpusReport analyze_corpus(const std::vector<ManifestEntry>& manifest, const AnalysisOptions& options,
                            const std::optional<std::filesystem::path>& out_dir);

nlohmann::json to_json(const CorpusReport& report);

// Two leading numeric columns x,y after a header row.
std::vector<Point> read_points_csv(const std::filesystem::path& path);
std::vector<Point> parse_points_csv(std::istream& in);
nlohmann::json to_json(const FitResult& fit);

struct OracleCheck {
  std::string mode;
  std::size_t cases = 0;
  std::size_t points = 0;
  double max_mean_deviation = 0.0;
  double max_variance_deviation = 0.0;
  double threshold = 0.0;
  // Monte Carlo only: share of grid points inside the statistical bounds.
  std::optional<double> mean_within;
  std::optional<double> variance_within;
  bool pass = false;
};

// Analytic curves against exhaustive enumeration for every integer partition
// of every N <= max_total.
OracleCheck check_partitions(std::uint64_t max_total);
OracleCheck check_exhaustive(const MultiplicitySpectrum& spec);
// |MC mean - v̄| <= 5 σ_v / √S and |MC var - σ²| <= 3 SE at >= 99% of points.
OracleCheck check_monte_carlo(const MultiplicitySpectrum& spec, const OracleCurves& mc);
OracleCheck check_monte_carlo(const MultiplicitySpectrum& spec, std::uint64_t samples, std::uint64_t seed,
                              const SampleGrid& grid, unsigned threads = 0);

nlohmann::json to_json(const OracleCheck& check);

// All integer partitions of `total`, each in non-increasing order.
std::vector<std::vector<std::uint64_t>> integer_partitions(std::uint64_t total);

}  // namespace heaps
