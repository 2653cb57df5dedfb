#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "heaps/error.hpp"
#include "heaps/report.hpp"
#include "support.hpp"

using namespace heaps;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A scratch directory removed at scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("heaps_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& path, std::mt19937_64& rng, std::uint64_t vocabulary, std::uint64_t total) {
  const auto text = heaps::testing::random_text(rng, heaps::testing::zipf_counts(vocabulary, total));
  std::ofstream out(path, std::ios::binary);
  write_interchange(out, text);
}

}  // namespace

TEST_CASE("Table 1 fixture") {
  const auto rows = read_table1(HEAPS_FIXTURE_DIR "/table1.csv");
  REQUIRE(rows.size() == 75);
  std::size_t suspects = 0;
  for (const auto& r : rows) suspects += r.suspect ? 1 : 0;
  CHECK(suspects == 1);
  const auto dic11 = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.code == "dic11"; });
  REQUIRE(dic11 != rows.end());
  CHECK(dic11->suspect);
  CHECK(dic11->total_words == 38553);
  CHECK(dic11->vocabulary == 23311);
  CHECK(rows[6].year == "1794/1871");
  const auto twa15 = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.code == "twa15"; });
  CHECK(twa15->title == "Tom Sawyer, Detective");
  CHECK(twa15->author == "M. Twain");
}

TEST_CASE("Table 1 Heaps fit against statsmodels") {
  const auto report = aggregate(table_summaries(read_table1(HEAPS_FIXTURE_DIR "/table1.csv")));
  const auto* h = report.find("heaps_V_vs_N");
  REQUIRE(h != nullptr);
  REQUIRE(h->fit.has_value());
  CHECK(h->n_points == 74);
  CHECK(h->kind == "loglog");
  // statsmodels 0.14 OLS on (ln N, ln V) over the 74 rows without dic11.
  CHECK(std::abs(h->fit->slope.value - 0.6851607743973624) <= 1e-12);
  CHECK(std::abs(h->fit->slope.std_error - 0.012802596931075215) <= 1e-12);
  CHECK(std::abs(h->fit->intercept.value - 1.4767092242574047) <= 1e-11);
  CHECK(std::abs(h->fit->pearson_r - 0.9876627515743746) <= 1e-12);
  // Rows without tag counts or curves leave the other fits empty.
  const auto* alpha = report.find("alpha_noun");
  REQUIRE(alpha != nullptr);
  CHECK(alpha->omitted.has_value());
  CHECK(report.find("beta_verb")->filter == "non-suspect rows, V >= 4000");
}

TEST_CASE("Table 1 parsing errors") {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_table1(in);
  };
  CHECK(code_of([&] { parse("code,author,title,N,V\n"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { parse("code,author,title,year,N,V\nx,a,t,1900,12x,3\n"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { parse("code,author,title,year,N,V\nx,a,\"t,1900,12,3\n"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { parse("code,author,title,year,N,V\nx,a,t,1900,12\n"); }) == ErrorCode::Parse);
  CHECK(code_of([&] { parse("# only a comment\n"); }) == ErrorCode::Parse);
  const auto rows = parse("code,author,title,year,N,V\nx,a,\"say \"\"hi\"\"\",1900,10,20\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].title == "say \"hi\"");
  CHECK(rows[0].suspect);  // V > N
}

TEST_CASE("manifest parsing") {
  std::istringstream in("# works\na\tdir/a.tsv\tFirst\nb\t/abs/b.tsv\n\n");
  const auto m = parse_manifest(in, "/base");
  REQUIRE(m.size() == 2);
  CHECK(m[0].path == fs::path("/base/dir/a.tsv"));
  CHECK(m[0].title == "First");
  CHECK(m[1].path == fs::path("/abs/b.tsv"));
  CHECK(m[1].title.empty());

  std::istringstream dup("a\tx.tsv\na\ty.tsv\n");
  CHECK(code_of([&] { parse_manifest(dup, "."); }) == ErrorCode::Parse);
  std::istringstream bad("only-one-field\n");
  CHECK(code_of([&] { parse_manifest(bad, "."); }) == ErrorCode::Parse);
  CHECK(code_of([] { read_manifest("/nonexistent/manifest.tsv"); }) == ErrorCode::Io);
}

TEST_CASE("points csv") {
  std::istringstream in("x,y\n1,2\n# comment\n3.5,4e2\n");
  const auto pts = parse_points_csv(in);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].y == 400.0);
  std::istringstream bad("x,y\n1,two\n");
  CHECK(code_of([&] { parse_points_csv(bad); }) == ErrorCode::Parse);
}

TEST_CASE("single work analysis") {
  AnalysisOptions options;
  options.grid = GridSpec::parse("full");
  const auto a = analyze_file(HEAPS_FIXTURE_DIR "/mini.tsv", "", options);
  CHECK(a.text.id() == "mini");
  const auto s = a.summary("Mini");
  CHECK(s.total_words == 17);
  CHECK(s.vocabulary == 9);
  REQUIRE(s.curves.has_value());
  CHECK(s.curves->grid == "full");
  CHECK_FALSE(s.curves->grid_statistics);
  CHECK(s.curves->relative.points == 15);

  std::ostringstream csv;
  write_curves_csv(csv, a);
  const auto text = csv.str();
  CHECK(text.rfind("n,v,mean,sd,delta,rel_delta,E_noun,E_verb,E_other\n1,1,1,0,0,,", 0) == 0);

  // The JSON form round-trips every number exactly.
  const auto doc = to_json(s);
  const auto back = summary_from_json(nlohmann::json::parse(doc.dump()));
  CHECK(to_json(back) == doc);
}

TEST_CASE("empty and unknown-tag inputs fail with their codes") {
  TempDir dir("errors");
  {
    std::ofstream(dir.path / "empty.tsv") << "# nothing here\n";
    std::ofstream(dir.path / "unknown.tsv") << "cat\tNN\ndog\tZZZ\n";
  }
  AnalysisOptions options;
  CHECK(code_of([&] { analyze_file(dir.path / "empty.tsv", "", options); }) == ErrorCode::EmptyText);
  CHECK(code_of([&] { analyze_file(dir.path / "unknown.tsv", "", options); }) == ErrorCode::UnknownPosTag);
  CHECK(code_of([&] { analyze_file(dir.path / "missing.tsv", "", options); }) == ErrorCode::Io);
}

TEST_CASE("corpus run: partial failure, pure fold and byte-identical reruns") {
  TempDir dir("corpus");
  std::mt19937_64 rng(5);
  write_text(dir.path / "w1.tsv", rng, 300, 3000);
  write_text(dir.path / "w2.tsv", rng, 500, 6000);
  write_text(dir.path / "w3.tsv", rng, 800, 9000);
  { std::ofstream(dir.path / "bad.tsv") << "x\tQQ\n"; }
  {
    std::ofstream m(dir.path / "manifest.tsv");
    m << "w1\tw1.tsv\tFirst work\nw2\tw2.tsv\tSecond\nbad\tbad.tsv\tBroken\nw3\tw3.tsv\tThird\n";
  }
  AnalysisOptions options;
  options.grid = GridSpec::parse("count:200");
  options.jobs = 3;
  const auto manifest = read_manifest(dir.path / "manifest.tsv");
  const auto report = analyze_corpus(manifest, options, dir.path / "out1");
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].id == "w1");
  CHECK(report.rows[2].id == "w3");
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].id == "bad");
  CHECK(report.failures[0].error == "UnknownPosTag");
  CHECK(report.rows.size() + report.failures.size() == manifest.size());

  // Every corpus number comes back from the per-work JSON files alone.
  std::vector<WorkSummary> rows;
  for (const auto& id : {"w1", "w2", "w3"}) {
    rows.push_back(summary_from_json(nlohmann::json::parse(slurp(dir.path / "out1" / (std::string(id) + ".json")))));
  }
  auto refolded = to_json(aggregate(rows));
  auto original = to_json(report);
  original.erase("failures");
  refolded.erase("failures");
  CHECK(refolded == original);

  // Same inputs, different worker count: identical bytes.
  options.jobs = 1;
  options.threads = 3;
  analyze_corpus(manifest, options, dir.path / "out2");
  for (const auto* name : {"corpus_report.json", "w1.json", "w2.curves.csv", "w3.ensemble.csv"}) {
    CAPTURE(name);
    CHECK(slurp(dir.path / "out1" / name) == slurp(dir.path / "out2" / name));
  }
}

TEST_CASE("corpus of one work omits every fit") {
  TempDir dir("single");
  std::mt19937_64 rng(8);
  write_text(dir.path / "only.tsv", rng, 200, 1500);
  { std::ofstream(dir.path / "manifest.tsv") << "only\tonly.tsv\tOnly\n"; }
  AnalysisOptions options;
  const auto report = analyze_corpus(read_manifest(dir.path / "manifest.tsv"), options, std::nullopt);
  REQUIRE(report.rows.size() == 1);
  for (const auto& f : report.fits) {
    CAPTURE(f.name);
    REQUIRE(f.omitted.has_value());
    CHECK(f.omitted->rfind("DegenerateInput", 0) == 0);
  }
}

TEST_CASE("oracle check verdicts") {
  const auto exhaustive = check_exhaustive(MultiplicitySpectrum::from_counts(std::vector<std::uint64_t>{3, 2, 1, 1}));
  CHECK(exhaustive.pass);
  CHECK(exhaustive.points == 7);
  const auto j = to_json(exhaustive);
  CHECK(j.at("mode") == "exhaustive");
  CHECK(j.at("threshold") == 1e-12);
  CHECK(code_of([] { check_partitions(13); }) == ErrorCode::TooLarge);
}
