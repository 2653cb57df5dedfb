// heaps: command-line front end over libheaps.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heaps.h"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kInputError = 1, kNumericsError = 2, kPartialCorpus = 3 };

int exit_code(heaps_status status) {
  switch (status) {
    case HEAPS_OK: return kOk;
    case HEAPS_ERR_NUMERICS:
    case HEAPS_ERR_INTERNAL: return kNumericsError;
    case HEAPS_ERR_PARTIAL_CORPUS: return kPartialCorpus;
    default: return kInputError;
  }
}

int report_error(heaps_status status, const std::string& context) {
  json record{{"error", heaps_status_name(status)}, {"message", heaps_last_error()}, {"context", context}};
  std::cerr << record.dump() << '\n';
  return exit_code(status);
}

int usage_error(const std::string& message) {
  json record{{"error", "InvalidArgument"}, {"message", message}};
  std::cerr << record.dump() << '\n';
  return kInputError;
}

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  heaps_string_free(s);
  return out;
}

struct Common {
  std::string grid = "count:1000";
  std::string tagmap;
  std::string normalize = "lower";
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool text_options) {
  cmd->add_option("--grid", c.grid, "evaluation grid: full or count:K")->capture_default_str();
  if (text_options) {
    cmd->add_option("--tagmap", c.tagmap, "tag map file (POSTAG = noun|verb|other|ignore)");
    cmd->add_option("--normalize", c.normalize, "surface normalization")
        ->check(CLI::IsMember({"lower", "none"}))
        ->capture_default_str();
  }
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--format", c.format, "stdout format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  cmd->add_option("--threads", c.threads, "worker threads per text, 0 = all cores")->capture_default_str();
}

heaps_options options_of(const Common& c) {
  heaps_options o;
  heaps_options_init(&o);
  o.grid = c.grid.c_str();
  o.tagmap_path = c.tagmap.empty() ? nullptr : c.tagmap.c_str();
  o.normalization = c.normalize == "none" ? HEAPS_NORMALIZE_NONE : HEAPS_NORMALIZE_LOWER;
  o.threads = c.threads;
  o.seed = c.seed;
  return o;
}

std::string csv_field(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (const char ch : s) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return quoted + "\"";
  }
  return v.dump();
}

// Per-work rows of a corpus report as one CSV table.
std::string corpus_rows_csv(const json& doc) {
  std::ostringstream out;
  out << "id,title,N,V,N_noun,N_verb,N_other,V_noun,V_verb,V_other,mean_rel,sd_rel,mean_abs,sd_abs,max_abs,"
         "min_abs,E_noun_mean,E_verb_mean,E_other_mean\n";
  const char* tags[] = {"noun", "verb", "other"};
  for (const auto& r : doc.at("rows")) {
    out << csv_field(r.at("id")) << ',' << csv_field(r.value("title", json())) << ',' << r.at("N") << ','
        << r.at("V");
    for (const char* key : {"N_tag", "V_tag"}) {
      for (const char* t : tags) out << ',' << (r.contains(key) ? csv_field(r[key][t]) : "");
    }
    if (r.contains("anomaly")) {
      const auto& a = r["anomaly"];
      out << ',' << csv_field(a["mean_rel"]) << ',' << csv_field(a["sd_rel"]) << ',' << csv_field(a["mean_abs"])
          << ',' << csv_field(a["sd_abs"]) << ',' << csv_field(a["max_abs"]["value"]) << ','
          << csv_field(a["min_abs"]["value"]);
      for (const char* t : tags) out << ',' << csv_field(r["excess"][t]["mean"]);
    } else {
      out << ",,,,,,,,,";
    }
    out << '\n';
  }
  return out.str();
}

std::string check_csv(const json& doc) {
  std::ostringstream out;
  out << "key,value\n";
  for (const auto& [key, value] : doc.items()) out << key << ',' << csv_field(value) << '\n';
  return out.str();
}

bool parse_spectrum(const std::string& text, std::vector<std::uint64_t>& m, std::vector<std::uint64_t>& c) {
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) return false;
    try {
      std::size_t used = 0;
      m.push_back(std::stoull(item.substr(0, colon), &used));
      if (used != colon) return false;
      const auto rest = item.substr(colon + 1);
      c.push_back(std::stoull(rest, &used));
      if (used != rest.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  return !m.empty();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heaps functions, shuffled-ensemble statistics and corpus fits for tagged texts"};
  app.set_version_flag("--version", std::string(heaps_version()));
  app.require_subcommand(1);

  Common analyze_opts;
  std::string analyze_path;
  std::string analyze_id;
  auto* analyze = app.add_subcommand("analyze", "analyze one interchange file");
  analyze->add_option("file", analyze_path, "surface<TAB>pos file")->required();
  analyze->add_option("--id", analyze_id, "work id (default: file stem)");
  add_common(analyze, analyze_opts, true);

  Common corpus_opts;
  std::string manifest_path;
  std::string table_path;
  unsigned jobs = 0;
  std::string mean_rel_fit = "linlog";
  auto* corpus = app.add_subcommand("corpus", "analyze a manifest of works, or fit a (N, V) table");
  corpus->add_option("manifest", manifest_path, "id<TAB>path<TAB>title per line");
  corpus->add_option("--table", table_path, "code,author,title,year,N,V table");
  corpus->add_option("--jobs", jobs, "concurrent works, 0 = all cores")->capture_default_str();
  corpus->add_option("--mean-rel-fit", mean_rel_fit, "abscissa transform of the mean relative anomaly fit")
      ->check(CLI::IsMember({"linlog", "linlin", "loglog"}))
      ->capture_default_str();
  add_common(corpus, corpus_opts, true);

  Common fit_opts;
  std::string fit_path;
  std::string fit_kind = "loglog";
  auto* fit = app.add_subcommand("fit", "least-squares fit of an x,y CSV");
  fit->add_option("csv", fit_path, "CSV with x,y in the first two columns")->required();
  fit->add_option("--kind", fit_kind, "loglog, linlin, linlog or proportional")
      ->check(CLI::IsMember({"loglog", "linlin", "linlog", "proportional"}))
      ->capture_default_str();
  add_common(fit, fit_opts, false);

  Common oracle_opts;
  std::string mode = "exhaustive";
  std::uint64_t max_n = 8;
  std::string spectrum_text;
  std::string text_path;
  std::uint64_t samples = 10000;
  auto* oracle = app.add_subcommand("oracle-check", "compare the closed forms against shuffling oracles");
  oracle->add_option("--mode", mode, "exhaustive or mc")->check(CLI::IsMember({"exhaustive", "mc"}))
      ->capture_default_str();
  oracle->add_option("--max-n", max_n, "exhaustive mode: every partition of N <= max-n")->capture_default_str();
  oracle->add_option("--spectrum", spectrum_text, "multiplicity spectrum m:c,m:c,...");
  oracle->add_option("--text", text_path, "interchange file whose spectrum is checked");
  oracle->add_option("--samples", samples, "Monte Carlo shuffles")->capture_default_str();
  oracle->add_option("--tagmap", oracle_opts.tagmap, "tag map file for --text");
  add_common(oracle, oracle_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return usage_error(e.what());
  }

  if (analyze->parsed()) {
    const auto opts = options_of(analyze_opts);
    char* doc = nullptr;
    char* csv = nullptr;
    const heaps_status st =
        heaps_analyze_work(analyze_path.c_str(), analyze_id.empty() ? nullptr : analyze_id.c_str(), &opts,
                           analyze_opts.out.empty() ? nullptr : analyze_opts.out.c_str(), &doc,
                           analyze_opts.format == "csv" ? &csv : nullptr);
    if (st != HEAPS_OK) return report_error(st, analyze_path);
    const auto json_text = take(doc);
    const auto csv_text = take(csv);
    std::cout << (analyze_opts.format == "csv" ? csv_text : json_text + "\n");
    return kOk;
  }

  if (corpus->parsed()) {
    if (manifest_path.empty() == table_path.empty()) {
      return usage_error("corpus takes either a manifest or --table, not both");
    }
    char* doc = nullptr;
    heaps_status st = HEAPS_OK;
    if (!table_path.empty()) {
      st = heaps_table_report(table_path.c_str(), &doc);
      if (st != HEAPS_OK) return report_error(st, table_path);
    } else {
      auto opts = options_of(corpus_opts);
      opts.jobs = jobs;
      opts.mean_rel_transform = mean_rel_fit == "linlin"   ? HEAPS_FIT_LINLIN
                                : mean_rel_fit == "loglog" ? HEAPS_FIT_LOGLOG
                                                           : HEAPS_FIT_LINLOG;
      st = heaps_analyze_corpus(manifest_path.c_str(), &opts,
                                corpus_opts.out.empty() ? nullptr : corpus_opts.out.c_str(), &doc);
      if (st != HEAPS_OK && st != HEAPS_ERR_PARTIAL_CORPUS) return report_error(st, manifest_path);
    }
    const auto text = take(doc);
    if (corpus_opts.format == "csv") {
      std::cout << corpus_rows_csv(json::parse(text));
    } else {
      std::cout << text << '\n';
    }
    if (st == HEAPS_ERR_PARTIAL_CORPUS) {
      const auto parsed = json::parse(text);
      for (const auto& f : parsed.at("failures")) {
        std::cerr << json{{"error", f.at("error")}, {"message", f.at("message")}, {"context", f.at("id")}}.dump()
                  << '\n';
      }
      return kPartialCorpus;
    }
    return kOk;
  }

  if (fit->parsed()) {
    char* doc = nullptr;
    char* residuals = nullptr;
    const heaps_status st = heaps_fit_file(fit_path.c_str(), fit_kind.c_str(), &doc, &residuals);
    if (st != HEAPS_OK) return report_error(st, fit_path);
    const auto json_text = take(doc);
    const auto csv_text = take(residuals);
    std::cout << (fit_opts.format == "csv" ? csv_text : json_text + "\n");
    return kOk;
  }

  if (oracle->parsed()) {
    char* doc = nullptr;
    int pass = 0;
    heaps_status st = HEAPS_OK;
    heaps_spectrum* spec = nullptr;
    if (!spectrum_text.empty() && !text_path.empty()) return usage_error("give --spectrum or --text, not both");
    if (!spectrum_text.empty()) {
      std::vector<std::uint64_t> m;
      std::vector<std::uint64_t> c;
      if (!parse_spectrum(spectrum_text, m, c)) return usage_error("--spectrum expects m:c,m:c,...");
      st = heaps_spectrum_from_pairs(m.data(), c.data(), m.size(), &spec);
      if (st != HEAPS_OK) return report_error(st, spectrum_text);
    } else if (!text_path.empty()) {
      heaps_tagmap* map = nullptr;
      if (!oracle_opts.tagmap.empty()) {
        st = heaps_tagmap_load(oracle_opts.tagmap.c_str(), &map);
        if (st != HEAPS_OK) return report_error(st, oracle_opts.tagmap);
      }
      heaps_text* text = nullptr;
      st = heaps_text_load(text_path.c_str(), map, HEAPS_NORMALIZE_LOWER, nullptr, &text);
      heaps_tagmap_free(map);
      if (st != HEAPS_OK) return report_error(st, text_path);
      st = heaps_spectrum_from_text(text, &spec);
      heaps_text_free(text);
      if (st != HEAPS_OK) return report_error(st, text_path);
    }

    if (mode == "exhaustive") {
      st = spec != nullptr ? heaps_oracle_check_exhaustive(spec, &doc, &pass)
                           : heaps_oracle_check_partitions(max_n, &doc, &pass);
    } else {
      if (spec == nullptr) return usage_error("mc mode needs --spectrum or --text");
      st = heaps_oracle_check_monte_carlo(spec, samples, oracle_opts.seed, oracle_opts.grid.c_str(),
                                          oracle_opts.threads, &doc, &pass);
    }
    heaps_spectrum_free(spec);
    if (st != HEAPS_OK) return report_error(st, "oracle-check");
    const auto text = take(doc);
    std::cout << (oracle_opts.format == "csv" ? check_csv(json::parse(text)) : text + "\n");
    return pass ? kOk : kNumericsError;
  }
  return kInputError;
}
