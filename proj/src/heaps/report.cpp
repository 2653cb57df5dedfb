#include "heaps/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

namespace heaps {

using nlohmann::json;

namespace {

constexpr double kExhaustiveThreshold = 1e-12;
constexpr double kMeanSigmas = 5.0;
constexpr double kVarianceStandardErrors = 3.0;
constexpr double kRequiredShare = 0.99;
constexpr std::uint64_t kLargeVocabulary = 4000;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

json to_json(const Extremum& e) { return {{"value", e.value}, {"n", e.n}}; }

Extremum extremum_from_json(const json& j) { return {j.at("value").get<double>(), j.at("n").get<std::uint64_t>()}; }

json to_json(const SeriesSummary& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"max", to_json(s.max)}, {"min", to_json(s.min)}, {"points", s.points}};
}

SeriesSummary summary_from(const json& j) {
  SeriesSummary s;
  s.mean = j.at("mean").get<double>();
  s.sd = j.at("sd").get<double>();
  s.max = extremum_from_json(j.at("max"));
  s.min = extremum_from_json(j.at("min"));
  s.points = j.at("points").get<std::size_t>();
  return s;
}

json per_class_json(const PerClass<std::uint64_t>& values) {
  json j = json::object();
  for (const TagClass tag : kWordClasses) j[std::string(to_string(tag))] = values[index(tag)];
  return j;
}

PerClass<std::uint64_t> per_class_from(const json& j) {
  PerClass<std::uint64_t> values{};
  for (const TagClass tag : kWordClasses) values[index(tag)] = j.at(std::string(to_string(tag))).get<std::uint64_t>();
  return values;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t parse_count(std::string_view field, std::size_t line) {
  const std::string text(trim(field));
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size()) {
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": expected a count, got '" + text + "'");
  }
  return value;
}

// RFC 4180 style fields: commas separate, double quotes protect.
std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  if (quoted) fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

}  // namespace

TagMap resolve_tag_map(const AnalysisOptions& options) {
  return options.tagmap ? TagMap::load(*options.tagmap) : TagMap::penn_default();
}

// ---------------------------------------------------------------------------
// Per-work analysis

WorkSummary WorkAnalysis::summary(std::string title) const {
  WorkSummary s;
  s.id = text.id();
  s.title = std::move(title);
  s.total_words = text.total_words();
  s.vocabulary = text.vocabulary_size();
  PerClass<std::uint64_t> words{};
  PerClass<std::uint64_t> vocab{};
  for (std::size_t c = 0; c < kNumWordClasses; ++c) {
    words[c] = text.words_per_class()[c];
    vocab[c] = text.vocabulary_per_class()[c];
  }
  s.words_per_class = words;
  s.vocabulary_per_class = vocab;
  WorkSummary::Curves curves;
  curves.grid = ensemble.grid.is_full() ? "full" : "count:" + std::to_string(ensemble.grid.size());
  curves.grid_statistics = anomaly.grid_statistics;
  curves.absolute = anomaly.absolute;
  curves.relative = anomaly.relative;
  curves.excess = excess.summary;
  curves.identity_residual = excess.identity_residual.value_or(0.0);
  s.curves = curves;
  return s;
}

WorkAnalysis analyze_text(TextRecord text, const AnalysisOptions& options) {
  const auto spec = spectrum(text);
  const auto grid = SampleGrid::from_spec(options.grid, text.total_words());
  auto heaps = empirical_heaps(text);
  auto ensemble = ensemble_curve(spec, grid, options.threads);
  auto anomaly_report = anomaly(heaps, ensemble);
  auto excess_report = excess(text, heaps, grid, &ensemble);
  return {std::move(text), std::move(heaps), std::move(ensemble), std::move(anomaly_report),
          std::move(excess_report)};
}

WorkAnalysis analyze_file(const std::filesystem::path& path, std::string id, const AnalysisOptions& options) {
  const auto tag_map = resolve_tag_map(options);
  const auto raw = read_interchange(path);
  if (id.empty()) id = path.stem().string();
  return analyze_text(build_text(raw, tag_map, options.normalization, std::move(id)), options);
}

json analysis_metadata(const AnalysisOptions& options, const TagMap& tag_map) {
  return {
      {"tag_map", tag_map.name()},
      {"normalization", std::string(to_string(options.normalization))},
      {"grid", options.grid.label()},
      {"mean_rel_average", "equal weight over grid points where sigma_v > 0"},
      {"sd_divisor", "number of points averaged"},
      {"word_type", "normalized surface form; class by majority of occurrences, ties to first occurrence"},
      {"n_tag", "counts occurrences by their own tag class"},
      {"fit_errors", "ordinary least-squares standard errors"},
  };
}

json to_json(const WorkSummary& s) {
  json j;
  j["id"] = s.id;
  j["title"] = s.title;
  j["N"] = s.total_words;
  j["V"] = s.vocabulary;
  if (s.suspect) j["suspect"] = true;
  if (s.words_per_class) j["N_tag"] = per_class_json(*s.words_per_class);
  if (s.vocabulary_per_class) j["V_tag"] = per_class_json(*s.vocabulary_per_class);
  if (s.curves) {
    const auto& c = *s.curves;
    j["grid"] = c.grid;
    j["grid_statistics"] = c.grid_statistics;
    j["anomaly"] = {
        {"mean_rel", c.relative.mean},  {"sd_rel", c.relative.sd},
        {"rel_points", c.relative.points}, {"max_rel", to_json(c.relative.max)},
        {"min_rel", to_json(c.relative.min)}, {"mean_abs", c.absolute.mean},
        {"sd_abs", c.absolute.sd},      {"max_abs", to_json(c.absolute.max)},
        {"min_abs", to_json(c.absolute.min)}, {"points", c.absolute.points},
    };
    json ex = json::object();
    for (const TagClass tag : kWordClasses) ex[std::string(to_string(tag))] = to_json(c.excess[index(tag)]);
    j["excess"] = ex;
    j["identity_residual"] = c.identity_residual;
  }
  return j;
}

WorkSummary summary_from_json(const json& j) {
  WorkSummary s;
  s.id = j.at("id").get<std::string>();
  s.title = j.value("title", std::string{});
  s.total_words = j.at("N").get<std::uint64_t>();
  s.vocabulary = j.at("V").get<std::uint64_t>();
  s.suspect = j.value("suspect", false);
  if (j.contains("N_tag")) s.words_per_class = per_class_from(j.at("N_tag"));
  if (j.contains("V_tag")) s.vocabulary_per_class = per_class_from(j.at("V_tag"));
  if (j.contains("anomaly")) {
    WorkSummary::Curves c;
    const auto& a = j.at("anomaly");
    c.grid = j.at("grid").get<std::string>();
    c.grid_statistics = j.at("grid_statistics").get<bool>();
    c.relative.mean = a.at("mean_rel").get<double>();
    c.relative.sd = a.at("sd_rel").get<double>();
    c.relative.points = a.at("rel_points").get<std::size_t>();
    c.relative.max = extremum_from_json(a.at("max_rel"));
    c.relative.min = extremum_from_json(a.at("min_rel"));
    c.absolute.mean = a.at("mean_abs").get<double>();
    c.absolute.sd = a.at("sd_abs").get<double>();
    c.absolute.max = extremum_from_json(a.at("max_abs"));
    c.absolute.min = extremum_from_json(a.at("min_abs"));
    c.absolute.points = a.at("points").get<std::size_t>();
    for (const TagClass tag : kWordClasses) {
      c.excess[index(tag)] = summary_from(j.at("excess").at(std::string(to_string(tag))));
    }
    c.identity_residual = j.at("identity_residual").get<double>();
    s.curves = c;
  }
  return s;
}

void write_curves_csv(std::ostream& out, const WorkAnalysis& a) {
  out << "n,v,mean,sd,delta,rel_delta,E_noun,E_verb,E_other\n" << std::setprecision(17);
  const auto& grid = a.ensemble.grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto n = grid[i];
    out << n << ',' << a.heaps.at(n) << ',' << a.ensemble.mean[i] << ',' << std::sqrt(a.ensemble.variance[i])
        << ',' << a.anomaly.delta[i] << ',';
    if (a.anomaly.rel_delta[i]) out << *a.anomaly.rel_delta[i];
    for (const TagClass tag : kWordClasses) out << ',' << a.excess.excess[index(tag)][i];
    out << '\n';
  }
}

void write_work_outputs(const std::filesystem::path& dir, const WorkAnalysis& analysis, const json& doc) {
  std::filesystem::create_directories(dir);
  const std::string id = analysis.text.id();
  {
    auto out = open_output(dir / (id + ".json"));
    out << doc.dump(2) << '\n';
  }
  {
    auto out = open_output(dir / (id + ".curves.csv"));
    write_curves_csv(out, analysis);
  }
  {
    auto out = open_output(dir / (id + ".ensemble.csv"));
    write_csv(out, analysis.ensemble);
  }
}

// ---------------------------------------------------------------------------
// Manifest and Table 1

std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      fail(ErrorCode::Parse, "manifest line " + std::to_string(line_no) + ": expected 'id<TAB>path<TAB>title'");
    }
    if (!ids.insert(fields[0]).second) {
      fail(ErrorCode::Parse, "manifest line " + std::to_string(line_no) + ": duplicate id '" + fields[0] + "'");
    }
    std::filesystem::path path(fields[1]);
    if (path.is_relative()) path = base / path;
    entries.push_back({fields[0], path, fields.size() == 3 ? fields[2] : std::string{}});
  }
  return entries;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

std::vector<Table1Row> parse_table1(std::istream& in) {
  std::vector<Table1Row> rows;
  std::set<std::string> suspects;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view directive = "# suspect:";
      if (line.rfind(directive, 0) == 0) {
        std::stringstream list(line.substr(directive.size()));
        std::string code;
        while (std::getline(list, code, ',')) {
          if (!trim(code).empty()) suspects.insert(std::string(trim(code)));
        }
      }
      continue;
    }
    const auto fields = split_csv(line, line_no);
    if (!header) {
      const std::vector<std::string> expected{"code", "author", "title", "year", "N", "V"};
      if (fields != expected) fail(ErrorCode::Parse, "table header must be 'code,author,title,year,N,V'");
      header = true;
      continue;
    }
    if (fields.size() != 6) {
      fail(ErrorCode::Parse, "table line " + std::to_string(line_no) + ": expected 6 fields");
    }
    Table1Row row{fields[0], fields[1], fields[2], fields[3], parse_count(fields[4], line_no),
                  parse_count(fields[5], line_no), false};
    rows.push_back(std::move(row));
  }
  if (!header) fail(ErrorCode::Parse, "table has no header");
  for (auto& row : rows) {
    row.suspect = suspects.count(row.code) > 0 || row.vocabulary > row.total_words || row.vocabulary == 0;
  }
  return rows;
}

std::vector<Table1Row> read_table1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return parse_table1(in);
}

std::vector<WorkSummary> table_summaries(const std::vector<Table1Row>& rows) {
  std::vector<WorkSummary> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    WorkSummary s;
    s.id = r.code;
    s.title = r.title;
    s.total_words = r.total_words;
    s.vocabulary = r.vocabulary;
    s.suspect = r.suspect;
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

const CorpusFit* CorpusReport::find(const std::string& name) const {
  for (const auto& f : fits) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

using Accessor = std::function<std::optional<double>(const WorkSummary&)>;

struct FitSpec {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::optional<Transform> transform;  // empty = proportional
  Accessor x;
  Accessor y;
  std::function<bool(const WorkSummary&)> keep;
  std::string filter;
};

std::optional<double> tag_words(const WorkSummary& s, TagClass tag) {
  if (!s.words_per_class) return std::nullopt;
  return static_cast<double>((*s.words_per_class)[index(tag)]);
}

std::optional<double> tag_vocabulary(const WorkSummary& s, TagClass tag) {
  if (!s.vocabulary_per_class) return std::nullopt;
  return static_cast<double>((*s.vocabulary_per_class)[index(tag)]);
}

CorpusFit run_fit(const FitSpec& spec, const std::vector<WorkSummary>& rows) {
  CorpusFit out;
  out.name = spec.name;
  out.x = spec.x_label;
  out.y = spec.y_label;
  out.kind = spec.transform ? std::string(to_string(*spec.transform)) : "proportional";
  out.filter = spec.filter.empty() ? "non-suspect rows" : "non-suspect rows, " + spec.filter;
  std::vector<Point> points;
  for (const auto& row : rows) {
    if (row.suspect || (spec.keep && !spec.keep(row))) continue;
    const auto x = spec.x(row);
    const auto y = spec.y(row);
    if (!x || !y) continue;
    points.push_back({*x, *y});
  }
  out.n_points = points.size();
  try {
    if (spec.transform) {
      out.fit = fit(points, *spec.transform);
    } else {
      out.ratio = proportionality_fit(points);
    }
  } catch (const Error& e) {
    out.omitted = std::string(to_string(e.code())) + ": " + e.what();
  }
  return out;
}

}  // namespace

CorpusReport aggregate(const std::vector<WorkSummary>& rows, Transform mean_rel_transform) {
  CorpusReport report;
  report.rows = rows;

  const auto always = [](const WorkSummary&) { return true; };
  const auto large = [](const WorkSummary& s) { return s.vocabulary >= kLargeVocabulary; };
  const Accessor words = [](const WorkSummary& s) { return std::optional<double>(static_cast<double>(s.total_words)); };
  const Accessor vocab = [](const WorkSummary& s) { return std::optional<double>(static_cast<double>(s.vocabulary)); };
  const auto curve_value = [](std::function<double(const WorkSummary::Curves&)> get) -> Accessor {
    return [get](const WorkSummary& s) -> std::optional<double> {
      if (!s.curves) return std::nullopt;
      return get(*s.curves);
    };
  };
  // LogLog fits only see rows where the quantity is positive.
  const auto positive = [](Accessor a) -> Accessor {
    return [a](const WorkSummary& s) -> std::optional<double> {
      const auto v = a(s);
      if (!v || !(*v > 0.0)) return std::nullopt;
      return v;
    };
  };

  std::vector<FitSpec> specs;
  specs.push_back({"heaps_V_vs_N", "N", "V", Transform::LogLog, words, vocab, always, ""});
  for (const TagClass tag : kWordClasses) {
    const std::string t(to_string(tag));
    const Accessor n_tag = [tag](const WorkSummary& s) { return tag_words(s, tag); };
    const Accessor v_tag = [tag](const WorkSummary& s) { return tag_vocabulary(s, tag); };
    specs.push_back({"heaps_" + t, "N_" + t, "V_" + t, Transform::LogLog, positive(n_tag), positive(v_tag), always, ""});
    specs.push_back({"alpha_" + t, "N", "N_" + t, std::nullopt, words, n_tag, always, ""});
    specs.push_back({"beta_" + t, "V", "V_" + t, std::nullopt, vocab, v_tag, large, "V >= 4000"});
  }

  const Accessor mean_rel = curve_value([](const WorkSummary::Curves& c) { return c.relative.mean; });
  const Accessor sd_rel = curve_value([](const WorkSummary::Curves& c) { return c.relative.sd; });
  const Accessor sd_abs = curve_value([](const WorkSummary::Curves& c) { return c.absolute.sd; });
  specs.push_back({"mean_rel_vs_V", "V", "mean_rel", mean_rel_transform, vocab, mean_rel, always, ""});
  const Transform alternate = mean_rel_transform == Transform::LinLog ? Transform::LinLin : Transform::LinLog;
  specs.push_back({"mean_rel_vs_V_" + std::string(to_string(alternate)), "V", "mean_rel", alternate, vocab, mean_rel,
                   always, ""});
  specs.push_back({"sd_rel_vs_V", "V", "sd_rel", Transform::LogLog, vocab, positive(sd_rel), always, ""});
  specs.push_back({"sd_abs_vs_V", "V", "sd_abs", Transform::LogLog, vocab, positive(sd_abs), always, ""});
  specs.push_back({"max_abs_vs_V", "V", "max_abs", Transform::LinLin, vocab,
                   curve_value([](const WorkSummary::Curves& c) { return c.absolute.max.value; }), always, ""});
  specs.push_back({"mean_abs_vs_V", "V", "mean_abs", Transform::LinLin, vocab,
                   curve_value([](const WorkSummary::Curves& c) { return c.absolute.mean; }), always, ""});
  specs.push_back({"min_abs_vs_V", "V", "min_abs", Transform::LinLin, vocab,
                   curve_value([](const WorkSummary::Curves& c) { return c.absolute.min.value; }), always, ""});

  for (const TagClass tag : kWordClasses) {
    const std::string t(to_string(tag));
    const auto c = index(tag);
    const Accessor v_tag = [tag](const WorkSummary& s) { return tag_vocabulary(s, tag); };
    // "other" grows with ln V_other; nouns and verbs are fitted linearly.
    const Transform level = tag == TagClass::Other ? Transform::LinLog : Transform::LinLin;
    const Transform spread = tag == TagClass::Other ? Transform::LinLog : Transform::LogLog;
    const Accessor positive_v_tag = positive(v_tag);
    specs.push_back({"excess_mean_" + t, "V_" + t, "mean_E_" + t, level, positive_v_tag,
                     curve_value([c](const WorkSummary::Curves& k) { return k.excess[c].mean; }), always, ""});
    specs.push_back({"excess_max_" + t, "V_" + t, "max_E_" + t, level, positive_v_tag,
                     curve_value([c](const WorkSummary::Curves& k) { return k.excess[c].max.value; }), always, ""});
    specs.push_back({"excess_min_" + t, "V_" + t, "min_E_" + t, Transform::LinLin, v_tag,
                     curve_value([c](const WorkSummary::Curves& k) { return k.excess[c].min.value; }), always, ""});
    const Accessor sd = curve_value([c](const WorkSummary::Curves& k) { return k.excess[c].sd; });
    specs.push_back({"excess_sd_" + t, "V_" + t, "sd_E_" + t, spread, positive_v_tag,
                     spread == Transform::LogLog ? positive(sd) : sd, always, ""});
  }

  for (const auto& spec : specs) report.fits.push_back(run_fit(spec, rows));

  // β ≈ α^h consistency, reported as β / α^h.
  const auto* h = report.find("heaps_V_vs_N");
  for (const TagClass tag : {TagClass::Noun, TagClass::Verb}) {
    const std::string t(to_string(tag));
    const auto* alpha = report.find("alpha_" + t);
    const auto* beta = report.find("beta_" + t);
    if (h && h->fit && alpha && alpha->ratio && beta && beta->ratio && alpha->ratio->value > 0.0) {
      report.diagnostics["beta_over_alpha_pow_h_" + t] =
          beta->ratio->value / std::pow(alpha->ratio->value, h->fit->slope.value);
    }
  }

  std::size_t with_curves = 0;
  std::size_t negative_mean_rel = 0;
  std::size_t large_rows = 0;
  std::size_t verb_negative = 0;
  std::size_t other_positive = 0;
  for (const auto& row : rows) {
    if (row.suspect || !row.curves) continue;
    ++with_curves;
    if (row.curves->relative.mean < 0.0) ++negative_mean_rel;
    if (row.vocabulary >= kLargeVocabulary) {
      ++large_rows;
      if (row.curves->excess[index(TagClass::Verb)].mean < 0.0) ++verb_negative;
      if (row.curves->excess[index(TagClass::Other)].mean > 0.0) ++other_positive;
    }
  }
  if (with_curves > 0) {
    report.diagnostics["share_mean_rel_negative"] =
        static_cast<double>(negative_mean_rel) / static_cast<double>(with_curves);
  }
  if (large_rows > 0) {
    report.diagnostics["share_mean_E_verb_negative_V4000"] =
        static_cast<double>(verb_negative) / static_cast<double>(large_rows);
    report.diagnostics["share_mean_E_other_positive_V4000"] =
        static_cast<double>(other_positive) / static_cast<double>(large_rows);
  }
  return report;
}

CorpusReport analyze_corpus(const std::vector<ManifestEntry>& manifest, const AnalysisOptions& options,
                            const std::optional<std::filesystem::path>& out_dir) {
  const auto tag_map = resolve_tag_map(options);
  const auto metadata = analysis_metadata(options, tag_map);

  std::vector<std::optional<WorkSummary>> results(manifest.size());
  std::vector<std::optional<WorkFailure>> failures(manifest.size());

  unsigned jobs = options.jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.jobs;
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(manifest.size(), 1)));
  AnalysisOptions per_work = options;
  if (jobs > 1 && per_work.threads == 0) per_work.threads = 1;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      const auto& entry = manifest[i];
      try {
        const auto raw = read_interchange(entry.path);
        auto analysis = analyze_text(build_text(raw, tag_map, per_work.normalization, entry.id), per_work);
        auto summary = analysis.summary(entry.title);
        if (out_dir) {
          auto doc = to_json(summary);
          doc["metadata"] = metadata;
          write_work_outputs(*out_dir, analysis, doc);
        }
        results[i] = std::move(summary);
      } catch (const Error& e) {
        failures[i] = WorkFailure{entry.id, std::string(to_string(e.code())), e.what()};
      } catch (const std::exception& e) {
        failures[i] = WorkFailure{entry.id, "InternalError", e.what()};
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::vector<WorkSummary> rows;
  for (auto& r : results) {
    if (r) rows.push_back(std::move(*r));
  }
  auto report = aggregate(rows, options.mean_rel_transform);
  for (auto& f : failures) {
    if (f) report.failures.push_back(std::move(*f));
  }
  if (out_dir) {
    auto doc = to_json(report);
    doc["metadata"] = metadata;
    auto out = open_output(*out_dir / "corpus_report.json");
    out << doc.dump(2) << '\n';
  }
  return report;
}

std::vector<Point> parse_points_csv(std::istream& in) {
  std::vector<Point> points;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto fields = split_csv(line, line_no);
    if (fields.size() < 2) fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": expected x,y");
    Point p;
    try {
      std::size_t used_x = 0;
      std::size_t used_y = 0;
      const std::string xs(trim(fields[0]));
      const std::string ys(trim(fields[1]));
      p.x = std::stod(xs, &used_x);
      p.y = std::stod(ys, &used_y);
      if (used_x != xs.size() || used_y != ys.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": x and y must be numbers");
    }
    points.push_back(p);
  }
  return points;
}

std::vector<Point> read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  return parse_points_csv(in);
}

json to_json(const FitResult& f) {
  return {
      {"transform", std::string(to_string(f.transform))},
      {"slope", f.slope.value},
      {"slope_se", f.slope.std_error},
      {"intercept", f.intercept.value},
      {"intercept_se", f.intercept.std_error},
      {"r", f.pearson_r},
      {"n_points", f.n_points},
  };
}

json to_json(const CorpusReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back(to_json(r));
  json fits = json::array();
  for (const auto& f : report.fits) {
    json j{{"name", f.name}, {"x", f.x}, {"y", f.y}, {"kind", f.kind}, {"filter", f.filter},
           {"n_points", f.n_points}};
    if (f.fit) j["result"] = to_json(*f.fit);
    if (f.ratio) j["result"] = {{"ratio", f.ratio->value}, {"ratio_se", f.ratio->std_error}};
    if (f.omitted) j["omitted"] = *f.omitted;
    fits.push_back(std::move(j));
  }
  json failures = json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"id", f.id}, {"error", f.error}, {"message", f.message}});
  }
  return {{"rows", rows}, {"fits", fits}, {"diagnostics", report.diagnostics}, {"failures", failures}};
}

// ---------------------------------------------------------------------------
// Oracle checks

std::vector<std::vector<std::uint64_t>> integer_partitions(std::uint64_t total) {
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> current;
  std::function<void(std::uint64_t, std::uint64_t)> recurse = [&](std::uint64_t left, std::uint64_t cap) {
    if (left == 0) {
      out.push_back(current);
      return;
    }
    for (std::uint64_t part = std::min(left, cap); part >= 1; --part) {
      current.push_back(part);
      recurse(left - part, part);
      current.pop_back();
    }
  };
  if (total > 0) recurse(total, total);
  return out;
}

OracleCheck check_exhaustive(const MultiplicitySpectrum& spec) {
  const auto oracle = exhaustive_oracle(spec);
  const auto curve = ensemble_curve(spec, oracle.grid, 1);
  OracleCheck check;
  check.mode = "exhaustive";
  check.cases = 1;
  check.points = oracle.grid.size();
  check.threshold = kExhaustiveThreshold;
  for (std::size_t i = 0; i < oracle.grid.size(); ++i) {
    check.max_mean_deviation = std::max(check.max_mean_deviation, std::abs(curve.mean[i] - oracle.mean[i]));
    check.max_variance_deviation =
        std::max(check.max_variance_deviation, std::abs(curve.variance[i] - oracle.variance[i]));
  }
  check.pass = check.max_mean_deviation <= check.threshold && check.max_variance_deviation <= check.threshold;
  return check;
}

OracleCheck check_partitions(std::uint64_t max_total) {
  if (max_total > kExhaustiveLimit) {
    fail(ErrorCode::TooLarge, "exhaustive partition sweep is limited to N <= " + std::to_string(kExhaustiveLimit));
  }
  OracleCheck total;
  total.mode = "exhaustive-partitions";
  total.threshold = kExhaustiveThreshold;
  total.pass = true;
  for (std::uint64_t n = 1; n <= max_total; ++n) {
    for (const auto& partition : integer_partitions(n)) {
      const auto one = check_exhaustive(MultiplicitySpectrum::from_counts(partition));
      ++total.cases;
      total.points += one.points;
      total.max_mean_deviation = std::max(total.max_mean_deviation, one.max_mean_deviation);
      total.max_variance_deviation = std::max(total.max_variance_deviation, one.max_variance_deviation);
      total.pass = total.pass && one.pass;
    }
  }
  return total;
}

OracleCheck check_monte_carlo(const MultiplicitySpectrum& spec, const OracleCurves& mc) {
  if (!mc.samples) fail(ErrorCode::InvalidArgument, "expected Monte Carlo curves");
  const auto curve = ensemble_curve(spec, mc.grid, 0);
  const auto samples = static_cast<double>(*mc.samples);
  OracleCheck check;
  check.mode = "monte-carlo";
  check.cases = 1;
  check.points = mc.grid.size();
  check.threshold = kRequiredShare;
  std::size_t mean_ok = 0;
  std::size_t variance_ok = 0;
  for (std::size_t i = 0; i < mc.grid.size(); ++i) {
    const double sigma2 = curve.variance[i];
    const double mean_dev = std::abs(mc.mean[i] - curve.mean[i]);
    const double var_dev = std::abs(mc.variance[i] - sigma2);
    check.max_mean_deviation = std::max(check.max_mean_deviation, mean_dev);
    check.max_variance_deviation = std::max(check.max_variance_deviation, var_dev);
    const double mean_bound = kMeanSigmas * std::sqrt(sigma2 / samples);
    // Var(s²) = (μ4 - σ⁴ (S-3)/(S-1)) / S.
    const double var_se =
        std::sqrt(std::max(0.0, (mc.fourth_moment[i] - sigma2 * sigma2 * (samples - 3.0) / (samples - 1.0)) / samples));
    if (sigma2 == 0.0) {
      mean_ok += mean_dev <= 1e-9 ? 1 : 0;
      variance_ok += var_dev <= 1e-9 ? 1 : 0;
    } else {
      mean_ok += mean_dev <= mean_bound ? 1 : 0;
      variance_ok += var_dev <= kVarianceStandardErrors * var_se ? 1 : 0;
    }
  }
  check.mean_within = static_cast<double>(mean_ok) / static_cast<double>(check.points);
  check.variance_within = static_cast<double>(variance_ok) / static_cast<double>(check.points);
  check.pass = *check.mean_within >= kRequiredShare && *check.variance_within >= kRequiredShare;
  return check;
}

OracleCheck check_monte_carlo(const MultiplicitySpectrum& spec, std::uint64_t samples, std::uint64_t seed,
                              const SampleGrid& grid, unsigned threads) {
  return check_monte_carlo(spec, monte_carlo_oracle(spec, samples, seed, grid, threads));
}

json to_json(const OracleCheck& c) {
  json j{{"mode", c.mode},
         {"cases", c.cases},
         {"points", c.points},
         {"max_mean_deviation", c.max_mean_deviation},
         {"max_variance_deviation", c.max_variance_deviation},
         {"threshold", c.threshold},
         {"pass", c.pass}};
  if (c.mean_within) j["mean_within_share"] = *c.mean_within;
  if (c.variance_within) j["variance_within_share"] = *c.variance_within;
  return j;
}

}  // namespace heaps
