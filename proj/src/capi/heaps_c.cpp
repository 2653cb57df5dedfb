#include "heaps.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "heaps/report.hpp"

struct heaps_tagmap {
  heaps::TagMap map;
};

struct heaps_text {
  heaps::TextRecord text;
};

struct heaps_spectrum {
  heaps::MultiplicitySpectrum spec;
};

namespace {

thread_local std::string last_error;

heaps_status status_of(heaps::ErrorCode code) {
  using heaps::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return HEAPS_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return HEAPS_ERR_IO;
    case ErrorCode::Parse: return HEAPS_ERR_PARSE;
    case ErrorCode::UnknownPosTag: return HEAPS_ERR_UNKNOWN_POS_TAG;
    case ErrorCode::EmptyText: return HEAPS_ERR_EMPTY_TEXT;
    case ErrorCode::Domain: return HEAPS_ERR_DOMAIN;
    case ErrorCode::DegenerateInput: return HEAPS_ERR_DEGENERATE_INPUT;
    case ErrorCode::Numerics: return HEAPS_ERR_NUMERICS;
    case ErrorCode::GridMismatch: return HEAPS_ERR_GRID_MISMATCH;
    case ErrorCode::TooLarge: return HEAPS_ERR_TOO_LARGE;
  }
  return HEAPS_ERR_INTERNAL;
}

template <typename F>
heaps_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const heaps::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return HEAPS_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return HEAPS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return HEAPS_ERR_INTERNAL;
  }
}

heaps_status invalid(const char* what) {
  last_error = what;
  return HEAPS_ERR_INVALID_ARGUMENT;
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

heaps::Normalization normalization_of(heaps_normalization n) {
  return n == HEAPS_NORMALIZE_NONE ? heaps::Normalization::None : heaps::Normalization::Lower;
}

heaps::Transform transform_of(heaps_transform t) {
  switch (t) {
    case HEAPS_FIT_LOGLOG: return heaps::Transform::LogLog;
    case HEAPS_FIT_LINLIN: return heaps::Transform::LinLin;
    case HEAPS_FIT_LINLOG: return heaps::Transform::LinLog;
  }
  heaps::fail(heaps::ErrorCode::InvalidArgument, "unknown transform");
}

heaps_transform transform_to_c(heaps::Transform t) {
  switch (t) {
    case heaps::Transform::LogLog: return HEAPS_FIT_LOGLOG;
    case heaps::Transform::LinLin: return HEAPS_FIT_LINLIN;
    case heaps::Transform::LinLog: return HEAPS_FIT_LINLOG;
  }
  return HEAPS_FIT_LINLIN;
}

heaps::AnalysisOptions options_of(const heaps_options* c) {
  heaps::AnalysisOptions o;
  if (c == nullptr) return o;
  if (c->grid != nullptr) o.grid = heaps::GridSpec::parse(c->grid);
  if (c->tagmap_path != nullptr) o.tagmap = std::filesystem::path(c->tagmap_path);
  o.normalization = normalization_of(c->normalization);
  o.threads = c->threads;
  o.jobs = c->jobs;
  o.seed = c->seed;
  o.mean_rel_transform = transform_of(c->mean_rel_transform);
  return o;
}

std::vector<heaps::Point> points_of(const double* x, const double* y, size_t count) {
  std::vector<heaps::Point> points(count);
  for (size_t i = 0; i < count; ++i) points[i] = {x[i], y[i]};
  return points;
}

void fill_fit(const heaps::FitResult& f, heaps_fit_result* out) {
  out->slope = f.slope.value;
  out->slope_se = f.slope.std_error;
  out->intercept = f.intercept.value;
  out->intercept_se = f.intercept.std_error;
  out->pearson_r = f.pearson_r;
  out->transform = transform_to_c(f.transform);
  out->n_points = f.n_points;
}

heaps_status deliver_check(const heaps::OracleCheck& check, char** json, int* pass) {
  if (json != nullptr) *json = duplicate(heaps::to_json(check).dump(2));
  if (pass != nullptr) *pass = check.pass ? 1 : 0;
  return HEAPS_OK;
}

}  // namespace

extern "C" {

const char* heaps_last_error(void) { return last_error.c_str(); }

const char* heaps_status_name(heaps_status status) {
  switch (status) {
    case HEAPS_OK: return "Ok";
    case HEAPS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case HEAPS_ERR_IO: return "IoError";
    case HEAPS_ERR_PARSE: return "ParseError";
    case HEAPS_ERR_UNKNOWN_POS_TAG: return "UnknownPosTag";
    case HEAPS_ERR_EMPTY_TEXT: return "EmptyText";
    case HEAPS_ERR_DOMAIN: return "DomainError";
    case HEAPS_ERR_DEGENERATE_INPUT: return "DegenerateInput";
    case HEAPS_ERR_NUMERICS: return "NumericsError";
    case HEAPS_ERR_GRID_MISMATCH: return "GridMismatch";
    case HEAPS_ERR_TOO_LARGE: return "TooLarge";
    case HEAPS_ERR_PARTIAL_CORPUS: return "PartialCorpus";
    case HEAPS_ERR_INTERNAL: return "InternalError";
  }
  return "Unknown";
}

const char* heaps_version(void) { return "1.0.0"; }

void heaps_string_free(char* s) { std::free(s); }

heaps_status heaps_tagmap_default(heaps_tagmap** out) {
  if (out == nullptr) return invalid("out is NULL");
  return guarded([&] {
    *out = new heaps_tagmap{heaps::TagMap::penn_default()};
    return HEAPS_OK;
  });
}

heaps_status heaps_tagmap_load(const char* path, heaps_tagmap** out) {
  if (path == nullptr || out == nullptr) return invalid("path and out are required");
  return guarded([&] {
    *out = new heaps_tagmap{heaps::TagMap::load(path)};
    return HEAPS_OK;
  });
}

void heaps_tagmap_free(heaps_tagmap* map) { delete map; }

heaps_status heaps_text_load(const char* path, const heaps_tagmap* map, heaps_normalization normalization,
                             const char* id, heaps_text** out) {
  if (path == nullptr || out == nullptr) return invalid("path and out are required");
  return guarded([&] {
    const auto raw = heaps::read_interchange(path);
    const auto fallback = map == nullptr ? heaps::TagMap::penn_default() : map->map;
    std::string name = id != nullptr ? id : std::filesystem::path(path).stem().string();
    *out = new heaps_text{heaps::build_text(raw, fallback, normalization_of(normalization), std::move(name))};
    return HEAPS_OK;
  });
}

heaps_status heaps_text_from_tokens(const char* const* surfaces, const char* const* pos_tags, size_t count,
                                    const heaps_tagmap* map, heaps_normalization normalization, const char* id,
                                    heaps_text** out) {
  if (out == nullptr || (count > 0 && (surfaces == nullptr || pos_tags == nullptr))) {
    return invalid("token arrays and out are required");
  }
  return guarded([&] {
    std::vector<heaps::RawToken> raw(count);
    for (size_t i = 0; i < count; ++i) {
      if (surfaces[i] == nullptr || pos_tags[i] == nullptr) return invalid("NULL token");
      raw[i] = {surfaces[i], pos_tags[i], i + 1};
    }
    const auto fallback = map == nullptr ? heaps::TagMap::penn_default() : map->map;
    *out = new heaps_text{
        heaps::build_text(raw, fallback, normalization_of(normalization), id != nullptr ? id : "")};
    return HEAPS_OK;
  });
}

void heaps_text_free(heaps_text* text) { delete text; }

heaps_status heaps_text_get_info(const heaps_text* text, heaps_text_info* info) {
  if (text == nullptr || info == nullptr) return invalid("text and info are required");
  info->total_words = text->text.total_words();
  info->vocabulary = text->text.vocabulary_size();
  for (size_t c = 0; c < 3; ++c) {
    info->words_per_class[c] = text->text.words_per_class()[c];
    info->vocabulary_per_class[c] = text->text.vocabulary_per_class()[c];
  }
  return HEAPS_OK;
}

heaps_status heaps_text_serialize(const heaps_text* text, char** out) {
  if (text == nullptr || out == nullptr) return invalid("text and out are required");
  return guarded([&] {
    std::ostringstream s;
    heaps::write_interchange(s, text->text);
    *out = duplicate(s.str());
    return HEAPS_OK;
  });
}

heaps_status heaps_text_heaps_curve(const heaps_text* text, int tag, uint32_t* values, size_t length) {
  if (text == nullptr || values == nullptr) return invalid("text and values are required");
  if (tag > HEAPS_TAG_OTHER) return invalid("unknown tag class");
  if (length != text->text.total_words()) return invalid("values must hold exactly N entries");
  return guarded([&] {
    const auto curve = heaps::empirical_heaps(text->text);
    const auto& src = tag < 0 ? curve.values : curve.per_class[static_cast<size_t>(tag)];
    std::copy(src.begin(), src.end(), values);
    return HEAPS_OK;
  });
}

heaps_status heaps_spectrum_from_text(const heaps_text* text, heaps_spectrum** out) {
  if (text == nullptr || out == nullptr) return invalid("text and out are required");
  return guarded([&] {
    *out = new heaps_spectrum{heaps::spectrum(text->text)};
    return HEAPS_OK;
  });
}

heaps_status heaps_spectrum_from_pairs(const uint64_t* multiplicities, const uint64_t* types, size_t count,
                                       heaps_spectrum** out) {
  if (out == nullptr || multiplicities == nullptr || types == nullptr) return invalid("arrays and out are required");
  return guarded([&] {
    std::vector<heaps::SpectrumEntry> entries(count);
    for (size_t i = 0; i < count; ++i) entries[i] = {multiplicities[i], types[i]};
    *out = new heaps_spectrum{heaps::MultiplicitySpectrum::from_entries(std::move(entries))};
    return HEAPS_OK;
  });
}

void heaps_spectrum_free(heaps_spectrum* spec) { delete spec; }

heaps_status heaps_spectrum_totals(const heaps_spectrum* spec, uint64_t* total_words, uint64_t* vocabulary,
                                   size_t* distinct) {
  if (spec == nullptr) return invalid("spec is NULL");
  if (total_words != nullptr) *total_words = spec->spec.total_words();
  if (vocabulary != nullptr) *vocabulary = spec->spec.vocabulary_size();
  if (distinct != nullptr) *distinct = spec->spec.distinct_multiplicities();
  return HEAPS_OK;
}

heaps_status heaps_spectrum_entries(const heaps_spectrum* spec, uint64_t* multiplicities, uint64_t* types,
                                    size_t capacity) {
  if (spec == nullptr || multiplicities == nullptr || types == nullptr) return invalid("arguments are required");
  const auto entries = spec->spec.entries();
  const size_t n = std::min(capacity, entries.size());
  for (size_t i = 0; i < n; ++i) {
    multiplicities[i] = entries[i].multiplicity;
    types[i] = entries[i].types;
  }
  return HEAPS_OK;
}

heaps_status heaps_binomial_tail_ratio(uint64_t total_words, uint64_t multiplicity, uint64_t n, double* out) {
  if (out == nullptr) return invalid("out is NULL");
  return guarded([&] {
    *out = heaps::binomial_tail_ratio(total_words, multiplicity, n);
    return HEAPS_OK;
  });
}

heaps_status heaps_grid(const char* spec, uint64_t total_words, uint64_t* points, size_t capacity, size_t* count) {
  if (spec == nullptr || count == nullptr) return invalid("spec and count are required");
  return guarded([&] {
    const auto grid = heaps::SampleGrid::from_spec(heaps::GridSpec::parse(spec), total_words);
    *count = grid.size();
    if (points != nullptr) {
      const size_t n = std::min(capacity, grid.size());
      std::copy_n(grid.points().begin(), n, points);
    }
    return HEAPS_OK;
  });
}

heaps_status heaps_ensemble(const heaps_spectrum* spec, const uint64_t* points, size_t count, unsigned threads,
                            double* mean, double* variance) {
  if (spec == nullptr || points == nullptr) return invalid("spec and points are required");
  return guarded([&] {
    for (size_t i = 1; i < count; ++i) {
      if (points[i] <= points[i - 1]) return invalid("points must be strictly increasing");
    }
    // The grid always holds 1 and N; pick the requested points back out.
    const auto grid = heaps::SampleGrid::explicit_points(spec->spec.total_words(),
                                                         std::vector<uint64_t>(points, points + count));
    std::vector<size_t> where(count);
    for (size_t i = 0; i < count; ++i) {
      where[i] = static_cast<size_t>(std::lower_bound(grid.points().begin(), grid.points().end(), points[i]) -
                                     grid.points().begin());
    }
    if (mean != nullptr) {
      const auto m = heaps::mean_curve(spec->spec, grid, threads);
      for (size_t i = 0; i < count; ++i) mean[i] = m[where[i]];
    }
    if (variance != nullptr) {
      const auto v = heaps::variance_curve(spec->spec, grid, threads);
      for (size_t i = 0; i < count; ++i) variance[i] = v[where[i]];
    }
    return HEAPS_OK;
  });
}

heaps_status heaps_fit(const double* x, const double* y, size_t count, heaps_transform transform,
                       heaps_fit_result* out) {
  if (out == nullptr || (count > 0 && (x == nullptr || y == nullptr))) return invalid("arrays and out are required");
  return guarded([&] {
    const auto points = points_of(x, y, count);
    fill_fit(heaps::fit(points, transform_of(transform)), out);
    return HEAPS_OK;
  });
}

heaps_status heaps_proportionality_fit(const double* x, const double* y, size_t count, double* ratio,
                                       double* ratio_se) {
  if (count > 0 && (x == nullptr || y == nullptr)) return invalid("arrays are required");
  return guarded([&] {
    const auto points = points_of(x, y, count);
    const auto e = heaps::proportionality_fit(points);
    if (ratio != nullptr) *ratio = e.value;
    if (ratio_se != nullptr) *ratio_se = e.std_error;
    return HEAPS_OK;
  });
}

void heaps_options_init(heaps_options* options) {
  if (options == nullptr) return;
  options->grid = nullptr;
  options->tagmap_path = nullptr;
  options->normalization = HEAPS_NORMALIZE_LOWER;
  options->threads = 0;
  options->jobs = 0;
  options->seed = 0;
  options->mean_rel_transform = HEAPS_FIT_LINLOG;
}

heaps_status heaps_analyze_work(const char* path, const char* id, const heaps_options* options, const char* out_dir,
                                char** json, char** curves_csv) {
  if (path == nullptr) return invalid("path is NULL");
  return guarded([&] {
    const auto opts = options_of(options);
    const auto analysis = heaps::analyze_file(path, id != nullptr ? id : "", opts);
    auto doc = heaps::to_json(analysis.summary());
    doc["metadata"] = heaps::analysis_metadata(opts, heaps::resolve_tag_map(opts));
    if (out_dir != nullptr) {
      std::filesystem::create_directories(out_dir);
      heaps::write_work_outputs(out_dir, analysis, doc);
    }
    if (curves_csv != nullptr) {
      std::ostringstream s;
      heaps::write_curves_csv(s, analysis);
      *curves_csv = duplicate(s.str());
    }
    if (json != nullptr) *json = duplicate(doc.dump(2));
    return HEAPS_OK;
  });
}

heaps_status heaps_analyze_corpus(const char* manifest_path, const heaps_options* options, const char* out_dir,
                                  char** json) {
  if (manifest_path == nullptr) return invalid("manifest path is NULL");
  return guarded([&] {
    const auto opts = options_of(options);
    const auto manifest = heaps::read_manifest(manifest_path);
    std::optional<std::filesystem::path> dir;
    if (out_dir != nullptr) {
      dir = out_dir;
      std::filesystem::create_directories(*dir);
    }
    const auto report = heaps::analyze_corpus(manifest, opts, dir);
    if (json != nullptr) {
      auto doc = heaps::to_json(report);
      doc["metadata"] = heaps::analysis_metadata(opts, heaps::resolve_tag_map(opts));
      *json = duplicate(doc.dump(2));
    }
    if (!report.failures.empty()) {
      last_error = std::to_string(report.failures.size()) + " of " + std::to_string(manifest.size()) +
                   " works failed";
      return HEAPS_ERR_PARTIAL_CORPUS;
    }
    return HEAPS_OK;
  });
}

heaps_status heaps_table_report(const char* table_path, char** json) {
  if (table_path == nullptr || json == nullptr) return invalid("table path and json are required");
  return guarded([&] {
    const auto rows = heaps::read_table1(table_path);
    auto doc = heaps::to_json(heaps::aggregate(heaps::table_summaries(rows)));
    *json = duplicate(doc.dump(2));
    return HEAPS_OK;
  });
}

heaps_status heaps_fit_file(const char* csv_path, const char* kind, char** json, char** residuals_csv) {
  if (csv_path == nullptr || kind == nullptr) return invalid("csv path and kind are required");
  return guarded([&] {
    const auto points = heaps::read_points_csv(csv_path);
    nlohmann::json doc;
    doc["kind"] = kind;
    doc["n_points"] = points.size();
    if (std::string_view(kind) == "proportional") {
      const auto e = heaps::proportionality_fit(points);
      doc["result"] = {{"ratio", e.value}, {"ratio_se", e.std_error}};
      if (residuals_csv != nullptr) {
        std::ostringstream s;
        s.precision(17);
        s << "x,y,residual\n";
        for (const auto& p : points) s << p.x << ',' << p.y << ',' << p.y - e.value * p.x << '\n';
        *residuals_csv = duplicate(s.str());
      }
    } else {
      const auto transform = heaps::parse_transform(kind);
      if (!transform) heaps::fail(heaps::ErrorCode::InvalidArgument, std::string("unknown fit kind '") + kind + "'");
      const auto result = heaps::fit(points, *transform);
      doc["result"] = heaps::to_json(result);
      if (residuals_csv != nullptr) {
        std::ostringstream s;
        heaps::write_fit_csv(s, points, result);
        *residuals_csv = duplicate(s.str());
      }
    }
    if (json != nullptr) *json = duplicate(doc.dump(2));
    return HEAPS_OK;
  });
}

heaps_status heaps_oracle_check_partitions(uint64_t max_total, char** json, int* pass) {
  return guarded([&] { return deliver_check(heaps::check_partitions(max_total), json, pass); });
}

heaps_status heaps_oracle_check_exhaustive(const heaps_spectrum* spec, char** json, int* pass) {
  if (spec == nullptr) return invalid("spec is NULL");
  return guarded([&] { return deliver_check(heaps::check_exhaustive(spec->spec), json, pass); });
}

heaps_status heaps_oracle_check_monte_carlo(const heaps_spectrum* spec, uint64_t samples, uint64_t seed,
                                            const char* grid, unsigned threads, char** json, int* pass) {
  if (spec == nullptr) return invalid("spec is NULL");
  return guarded([&] {
    const auto grid_spec = heaps::GridSpec::parse(grid != nullptr ? grid : "count:1000");
    const auto sample_grid = heaps::SampleGrid::from_spec(grid_spec, spec->spec.total_words());
    auto check = heaps::check_monte_carlo(spec->spec, samples, seed, sample_grid, threads);
    auto doc = heaps::to_json(check);
    doc["samples"] = samples;
    doc["seed"] = seed;
    doc["generator"] = std::string(heaps::kGeneratorName);
    if (json != nullptr) *json = duplicate(doc.dump(2));
    if (pass != nullptr) *pass = check.pass ? 1 : 0;
    return HEAPS_OK;
  });
}

}  // extern "C"
