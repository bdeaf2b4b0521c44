#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "volcast/cli.hpp"
#include "volcast/error.hpp"
#include "volcast/report.hpp"

using namespace volcast;
namespace fs = std::filesystem;

namespace {

const fs::path kData = VOLCAST_TEST_DATA;
const std::string kSample = (kData / "sample_measures.csv").string();

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("volcast_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  if (sep == ' ') {
    std::istringstream in(line);
    for (std::string f; in >> f;) out.push_back(f);
    return out;
  }
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::map<std::string, std::string> read_ini(const fs::path& p) {
  std::map<std::string, std::string> kv;
  for (const auto& line : lines_of(slurp(p))) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// Small panel CSV in the measures layout; `rv` gives F02's column as a
// function of F01's.
std::string measures_csv(std::size_t days, bool duplicate, double shift = 0.0) {
  std::ostringstream s;
  s << "date,F01:rv,F01:bpv,F01:rq,F01:jump,F02:rv,F02:bpv,F02:rq,F02:jump\n";
  for (std::size_t t = 0; t < days; ++t) {
    const double a = 1.0 + 0.5 * std::sin(0.37 * static_cast<double>(t)) +
                     0.3 * std::cos(1.3 * static_cast<double>(t * t % 17));
    const double b = duplicate ? a : 1.0 + 0.4 * std::cos(0.23 * static_cast<double>(t) + 1.0);
    const int y = 2010 + static_cast<int>(t / 250), d = static_cast<int>(t % 250);
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02d-%02d", y, 1 + d / 25, 1 + d % 25);
    s << date;
    for (double v : {a + shift, b}) s << ',' << v << ',' << v << ',' << v * v << ",0";
    s << '\n';
  }
  return s.str();
}

TestRecord record(const std::string& firm, const std::string& model, EpaTest test, double stat,
                  double p) {
  TestRecord r;
  r.firm = firm;
  r.bench = "har:ols:bench";
  r.model = model;
  r.test = test;
  EpaResult e;
  e.test = test;
  e.statistic = stat;
  e.p_value = p;
  e.n = 100;
  r.result = e;
  return r;
}

std::vector<TestRecord> grid_records(std::size_t firms) {
  std::vector<TestRecord> recs;
  const std::vector<std::string> models{"har:lasso:cross", "harq:alasso:cross", "har:enet:cross"};
  for (std::size_t f = 0; f < firms; ++f) {
    char name[8];
    std::snprintf(name, sizeof name, "F%02zu", f + 1);
    for (std::size_t m = 0; m < models.size(); ++m) {
      const double stat = -2.5 + 0.173 * static_cast<double>(f) + 0.61 * static_cast<double>(m);
      const double p = std::fmod(0.013 * static_cast<double>(f * 3 + m + 1), 1.0);
      recs.push_back(record(name, models[m], EpaTest::DM, stat, p));
    }
  }
  return recs;
}

}  // namespace

TEST_CASE("unknown options, subcommands and missing --out exit with 2") {
  const auto dir = scratch("bad_args");
  CHECK(invoke({"forecast", "--in", kSample, "--bogus", "--out", dir.string()}).code == kExitConfig);
  CHECK(invoke({"frobnicate"}).code == kExitConfig);
  CHECK(invoke({"forecast", "--in", kSample}).code == kExitConfig);
  CHECK(invoke({"forecast", "--in", kSample, "--model", "nope:lasso", "--out", dir.string()}).code ==
        kExitConfig);
  fs::create_directories(dir / "runs");
  CHECK(invoke({"test", "--runs", (dir / "runs").string(), "--alpha", "1.5", "--out",
                (dir / "t").string()})
            .code == kExitConfig);
  CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("an unknown key in a config file exits with 2") {
  const auto dir = scratch("bad_config");
  fs::create_directories(dir);
  spit(dir / "cfg.ini", "window=100\nbogus-key=1\n");
  const auto o = invoke({"forecast", "--in", kSample, "--config", (dir / "cfg.ini").string(),
                         "--out", (dir / "out").string()});
  CHECK(o.code == kExitConfig);
  spit(dir / "cfg2.ini", "window 100\n");
  CHECK(invoke({"forecast", "--in", kSample, "--config", (dir / "cfg2.ini").string(), "--out",
                (dir / "out").string()})
            .code == kExitConfig);
  CHECK(invoke({"forecast", "--in", kSample, "--config", (dir / "missing.ini").string(), "--out",
                (dir / "out").string()})
            .code == kExitConfig);
}

TEST_CASE("data errors exit with 3") {
  const auto dir = scratch("bad_data");
  fs::create_directories(dir);
  CHECK(invoke({"measures", "--in", (dir / "absent.csv").string(), "--out", (dir / "o").string()})
            .code == kExitData);

  spit(dir / "negative.csv", measures_csv(80, false, -5.0));
  const auto o = invoke({"measures", "--in", (dir / "negative.csv").string(), "--out",
                         (dir / "o").string()});
  CHECK(o.code == kExitData);
  CHECK(o.err.find("error:") != std::string::npos);

  // Window longer than the sample.
  CHECK(invoke({"forecast", "--in", kSample, "--window", "5000", "--out", (dir / "o2").string()})
            .code == kExitData);
}

TEST_CASE("a singular cross-section design exits with 4") {
  const auto dir = scratch("singular");
  fs::create_directories(dir);
  spit(dir / "dup.csv", measures_csv(120, true));
  const auto o = invoke({"fit", "--in", (dir / "dup.csv").string(), "--spec", "har", "--penalty",
                         "ols", "--scope", "cross", "--out", (dir / "o").string()});
  CHECK(o.code == kExitNumerical);
}

TEST_CASE("command-line flags take precedence over the config file") {
  const auto dir = scratch("precedence");
  fs::create_directories(dir);
  spit(dir / "cfg.ini", "# comment\nwindow = 300\nseed=3\nmodel=har:ols\n\n");
  const auto o = invoke({"forecast", "--in", kSample, "--config", (dir / "cfg.ini").string(),
                         "--window", "400", "--out", (dir / "out").string()});
  REQUIRE(o.code == kExitOk);
  const auto kv = read_ini(dir / "out" / "config.ini");
  CHECK(kv.at("window") == "400");
  CHECK(kv.at("seed") == "3");
  CHECK(kv.at("model") == "har:ols");
  CHECK(kv.count("threads") == 0);
  CHECK(kv.count("out") == 0);

  const auto run = read_run(dir / "out" / "F01__har-ols-bench.csv");
  CHECK(run.config.window == 400);
}

TEST_CASE("identical benchmark and model give n/a tests with a DegenerateSeries note") {
  const auto dir = scratch("identical");
  REQUIRE(invoke({"forecast", "--in", kSample, "--bench", "har:ols", "--model", "har:ols",
                  "--window", "252", "--out", (dir / "runs").string()})
              .code == kExitOk);
  const auto o = invoke({"test", "--runs", (dir / "runs").string(), "--out", (dir / "t").string()});
  REQUIRE(o.code == kExitOk);
  const auto rows = lines_of(slurp(dir / "t" / "epa_results.csv"));
  REQUIRE(rows.size() == 1 + 3 * 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i], ',');
    CHECK(f[4] == "n/a");
    // GW sees an all-zero differential through its instrument covariance.
    CHECK(f.back() == (f[3] == "GW" ? "SingularOmega" : "DegenerateSeries"));
  }
  const auto dm = lines_of(slurp(dir / "t" / "dm_table.txt"));
  REQUIRE(dm.size() == 6);
  CHECK(fields(dm[3], ' ') == std::vector<std::string>{"F01", "n/a", "n/a"});
}

TEST_CASE("table layout: a row per firm, a stat/p pair per model") {
  const auto tables = build_tables(grid_records(27), 0.05);
  REQUIRE(tables.size() == 1);
  const auto& t = tables.front();
  CHECK(t.firms.size() == 27);
  CHECK(t.columns.size() == 3);

  const auto text = lines_of(render_table(t, TableFormat::Text));
  REQUIRE(text.size() == 3 + 27);
  const auto csv = lines_of(render_table(t, TableFormat::Csv));
  REQUIRE(csv.size() == 1 + 27);
  CHECK(fields(csv[0], ',').size() == 7);
  for (std::size_t r = 0; r < 27; ++r) {
    const auto tf = fields(text[3 + r], ' ');
    const auto cf = fields(csv[1 + r], ',');
    REQUIRE(tf.size() == 7);
    REQUIRE(cf.size() == 7);
    CHECK(tf[0] == t.firms[r]);
    CHECK(cf[0] == t.firms[r]);
    for (std::size_t c = 1; c < 7; ++c) {
      std::string shown = tf[c];
      const bool starred = !shown.empty() && shown.back() == '*';
      if (starred) shown.pop_back();
      const double full = std::stod(cf[c]);
      CHECK(std::abs(std::stod(shown) - full) <= 0.0005 + 1e-12);
      if (c % 2 == 0) CHECK(starred == (full < 0.05));
      else CHECK_FALSE(starred);
    }
  }

  // JSON round trip reproduces the table exactly.
  CHECK(parse_table_json(render_table(t, TableFormat::Json)) == t);
}

TEST_CASE("a single firm renders a single row") {
  const auto tables = build_tables(grid_records(1), 0.05);
  REQUIRE(tables.size() == 1);
  CHECK(lines_of(render_table(tables[0], TableFormat::Text)).size() == 4);
  CHECK(lines_of(render_table(tables[0], TableFormat::Csv)).size() == 2);
}

TEST_CASE("tables group by test in first-seen order and keep n/a cells") {
  auto recs = grid_records(2);
  TestRecord missing;
  missing.firm = "F01";
  missing.bench = "har:ols:bench";
  missing.model = "har:lasso:cross";
  missing.test = EpaTest::CW;
  missing.note = "DegenerateSeries";
  recs.push_back(missing);
  const auto tables = build_tables(recs, 0.1);
  REQUIRE(tables.size() == 2);
  CHECK(tables[0].test == EpaTest::DM);
  CHECK(tables[1].test == EpaTest::CW);
  CHECK(tables[1].alpha == 0.1);
  REQUIRE(tables[1].cells.size() == 1);
  CHECK_FALSE(tables[1].cells[0][0].statistic.has_value());
  CHECK(tables[1].cells[0][0].note == "DegenerateSeries");
  CHECK(parse_table_json(render_table(tables[1], TableFormat::Json)) == tables[1]);
}

TEST_CASE("rendering an empty table throws EmptyResults") {
  EpaTable t;
  t.columns = {"har:lasso:cross"};
  for (auto fmt : {TableFormat::Text, TableFormat::Csv, TableFormat::Json}) {
    try {
      (void)render_table(t, fmt);
      FAIL("expected EmptyResults");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyResults);
    }
  }
}

TEST_CASE("sha256 of a known vector") {
  const auto dir = scratch("sha");
  fs::create_directories(dir);
  spit(dir / "abc", "abc");
  CHECK(sha256_file(dir / "abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  spit(dir / "empty", "");
  CHECK(sha256_file(dir / "empty") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("manifest hashes match the files and its config reproduces the outputs") {
  const auto dir = scratch("manifest");
  const std::vector<std::string> base{"report", "--in", kSample, "--bench", "har:ols", "--model",
                                      "har:lasso", "--window", "300", "--grid", "10",
                                      "--cv-refresh", "25", "--seed", "11"};
  auto args = base;
  args.insert(args.end(), {"--out", (dir / "a").string()});
  REQUIRE(invoke(args).code == kExitOk);

  const auto m = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(m.at("command") == "report");
  CHECK(m.at("seed") == "11");
  REQUIRE(m.at("outputs").size() > 0);
  for (const auto& o : m.at("outputs"))
    CHECK(o.at("sha256") == sha256_file(dir / "a" / o.at("path").get<std::string>()));
  REQUIRE(m.at("inputs").size() == 1);
  CHECK(m.at("inputs")[0].at("sha256") == sha256_file(kSample));

  // Rerun from config.ini alone.
  REQUIRE(invoke({"report", "--config", (dir / "a" / "config.ini").string(), "--out",
                  (dir / "b").string()})
              .code == kExitOk);
  for (const auto& o : m.at("outputs")) {
    const auto rel = o.at("path").get<std::string>();
    CHECK_MESSAGE(slurp(dir / "a" / rel) == slurp(dir / "b" / rel), rel);
  }
}

TEST_CASE("report output matches the frozen golden files") {
  const auto dir = scratch("golden");
  REQUIRE(invoke({"report", "--in", kSample, "--bench", "har:ols", "--model", "har:lasso,harq:alasso",
                  "--window", "252", "--grid", "20", "--cv-refresh", "20", "--seed", "7", "--out",
                  dir.string()})
              .code == kExitOk);
  const fs::path golden = kData / "golden";
  CHECK(slurp(dir / "summary.txt") == slurp(golden / "summary.txt"));
  for (const char* name : {"dm_table.txt", "cw_table.txt", "gw_table.txt"})
    CHECK_MESSAGE(slurp(dir / "tables" / name) == slurp(golden / name), name);

  const auto got = lines_of(slurp(dir / "tables" / "epa_results.csv"));
  const auto want = lines_of(slurp(golden / "epa_results.csv"));
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto g = fields(got[i], ','), w = fields(want[i], ',');
    REQUIRE(g.size() == w.size());
    for (std::size_t c = 0; c < g.size(); ++c) {
      if (i > 0 && (c == 4 || c == 5) && w[c] != "n/a") {
        const double a = std::stod(g[c]), b = std::stod(w[c]);
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
      } else {
        CHECK(g[c] == w[c]);
      }
    }
  }
}

TEST_CASE("forecast runs are byte-identical across thread counts") {
  const auto dir = scratch("threads");
  std::map<std::string, std::string> first;
  for (const char* threads : {"1", "3"}) {
    const auto out = dir / threads;
    REQUIRE(invoke({"forecast", "--in", kSample, "--model", "har:lasso,har:enet", "--window", "300",
                    "--grid", "10", "--cv-refresh", "10", "--seed", "5", "--threads", threads,
                    "--out", out.string()})
                .code == kExitOk);
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(out))
      files[e.path().filename().string()] = slurp(e.path());
    if (first.empty()) first = files;
    else CHECK(files == first);
  }
  CHECK(first.size() == 2 * 3 + 2);
}
