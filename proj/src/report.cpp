#include "volcast/report.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "volcast/csv.hpp"
#include "volcast/error.hpp"

namespace volcast {

using nlohmann::json;

std::string_view version() noexcept { return "1.0.0"; }

namespace {

bool recordable(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateSeries:
    case ErrorCode::SingularOmega:
    case ErrorCode::ExpandingSchemeRejected:
    case ErrorCode::TooFewObservations:
      return true;
    default:
      return false;
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::vector<TestRecord> evaluate_run(const ForecastRun& run, const EvaluationOptions& options) {
  const std::size_t h = run.config.horizon;
  if (run.config.loss == Loss::Squared && run.size() > 0) {
    const double dbar = mean_of(run.d);
    const double fbar = mean_of(cw_adjusted_losses(run.e1, run.e2, run.f1, run.f2));
    if (fbar < dbar - 1e-12 * (std::abs(dbar) + std::abs(fbar)))
      throw std::logic_error("CW mean below DM mean for firm " + run.firm);
  }
  std::vector<TestRecord> out;
  for (EpaTest t : options.tests) {
    TestRecord rec;
    rec.firm = run.firm;
    rec.bench = run.bench_label;
    rec.model = run.model_label;
    rec.test = t;
    try {
      switch (t) {
        case EpaTest::DM: rec.result = dm_test(run.L1, run.L2, h); break;
        case EpaTest::CW: rec.result = cw_test(run.e1, run.e2, run.f1, run.f2, h); break;
        case EpaTest::GW:
          rec.result = gw_test(run.d, options.gw_instruments, h, run.config.scheme);
          break;
      }
    } catch (const Error& e) {
      if (!recordable(e.code())) rethrow_with_context(e, "firm " + run.firm);
      rec.note = std::string(to_string(e.code()));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<EpaTable> build_tables(const std::vector<TestRecord>& records, double alpha) {
  std::vector<EpaTable> tables;
  auto index_of = [](std::vector<std::string>& v, const std::string& s) {
    const auto it = std::find(v.begin(), v.end(), s);
    if (it != v.end()) return static_cast<std::size_t>(it - v.begin());
    v.push_back(s);
    return v.size() - 1;
  };
  for (const auto& rec : records) {
    auto it = std::find_if(tables.begin(), tables.end(),
                           [&](const EpaTable& t) { return t.test == rec.test; });
    if (it == tables.end()) {
      tables.push_back(EpaTable{rec.test, alpha, {}, {}, {}});
      it = tables.end() - 1;
    }
    const auto col = index_of(it->columns, rec.model);
    const auto row = index_of(it->firms, rec.firm);
    it->cells.resize(it->firms.size());
    for (auto& r : it->cells) r.resize(it->columns.size());
    EpaCell& cell = it->cells[row][col];
    if (rec.result) {
      cell.statistic = rec.result->statistic;
      cell.p_value = rec.result->p_value;
    }
    cell.note = rec.note;
  }
  return tables;
}

namespace {

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  auto s = os.str();
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string rpad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string render_text(const EpaTable& t) {
  std::size_t fw = 4;
  for (const auto& f : t.firms) fw = std::max(fw, f.size());
  fw += 2;
  std::size_t cw = 20;
  for (const auto& c : t.columns) cw = std::max(cw, c.size() + 2);

  std::vector<std::string> lines;
  lines.push_back(std::string(to_string(t.test)) + " test statistics and p-values (* marks p < " +
                  fixed3(t.alpha) + ")");
  std::string labels = pad("", fw), units = pad("firm", fw);
  for (const auto& c : t.columns) {
    labels += pad(c, cw);
    units += pad(rpad_left("stat", 8) + rpad_left("p", 9), cw);
  }
  lines.push_back(labels);
  lines.push_back(units);
  for (std::size_t r = 0; r < t.firms.size(); ++r) {
    std::string line = pad(t.firms[r], fw);
    for (const auto& cell : t.cells[r]) {
      std::string s;
      if (cell.statistic && cell.p_value) {
        s = rpad_left(fixed3(*cell.statistic), 8) + rpad_left(fixed3(*cell.p_value), 9);
        if (*cell.p_value < t.alpha) s += "*";
      } else {
        s = rpad_left("n/a", 8) + rpad_left("n/a", 9);
      }
      line += pad(s, cw);
    }
    lines.push_back(std::move(line));
  }
  std::string out;
  for (auto& l : lines) {
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + "\n";
  }
  return out;
}

std::string render_csv(const EpaTable& t) {
  std::ostringstream os;
  os << "firm";
  for (const auto& c : t.columns) os << ',' << c << "_stat," << c << "_p";
  os << "\n";
  for (std::size_t r = 0; r < t.firms.size(); ++r) {
    os << t.firms[r];
    for (const auto& cell : t.cells[r]) {
      if (cell.statistic && cell.p_value)
        os << ',' << csv::format_double(*cell.statistic) << ',' << csv::format_double(*cell.p_value);
      else
        os << ",n/a,n/a";
    }
    os << "\n";
  }
  return os.str();
}

json table_to_json(const EpaTable& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.firms.size(); ++r) {
    json cells = json::array();
    for (const auto& c : t.cells[r]) {
      json jc;
      jc["stat"] = c.statistic ? json(*c.statistic) : json(nullptr);
      jc["p"] = c.p_value ? json(*c.p_value) : json(nullptr);
      jc["note"] = c.note;
      cells.push_back(std::move(jc));
    }
    rows.push_back({{"firm", t.firms[r]}, {"cells", std::move(cells)}});
  }
  return {{"test", std::string(to_string(t.test))},
          {"alpha", t.alpha},
          {"columns", t.columns},
          {"rows", std::move(rows)}};
}

}  // namespace

std::string render_table(const EpaTable& table, TableFormat format) {
  if (table.firms.empty() || table.columns.empty())
    throw Error(ErrorCode::EmptyResults, "no test results to render");
  switch (format) {
    case TableFormat::Text: return render_text(table);
    case TableFormat::Csv: return render_csv(table);
    case TableFormat::Json: return table_to_json(table).dump(2) + "\n";
  }
  return {};
}

EpaTable parse_table_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    EpaTable t;
    t.test = parse_test(j.at("test").get<std::string>());
    t.alpha = j.at("alpha").get<double>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
      t.firms.push_back(row.at("firm").get<std::string>());
      std::vector<EpaCell> cells;
      for (const auto& c : row.at("cells")) {
        EpaCell cell;
        if (!c.at("stat").is_null()) cell.statistic = c.at("stat").get<double>();
        if (!c.at("p").is_null()) cell.p_value = c.at("p").get<double>();
        cell.note = c.at("note").get<std::string>();
        cells.push_back(std::move(cell));
      }
      t.cells.push_back(std::move(cells));
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("table JSON: ") + e.what());
  }
}

std::string format_records(const std::vector<TestRecord>& records, double alpha) {
  std::ostringstream os;
  os << "firm,bench,model,test,stat,p,reject,n,bandwidth,q,note\n";
  for (const auto& r : records) {
    os << r.firm << ',' << r.bench << ',' << r.model << ',' << to_string(r.test) << ',';
    if (r.result) {
      const auto& e = *r.result;
      os << csv::format_double(e.statistic) << ',' << csv::format_double(e.p_value) << ','
         << (e.rejects(alpha) ? 1 : 0) << ',' << e.n << ',' << e.bandwidth << ',' << e.q << ',';
    } else {
      os << "n/a,n/a,n/a,,,,";
    }
    os << r.note << "\n";
  }
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 failed for " + path.string());
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
  std::ostringstream ini;
  for (const auto& [k, v] : m.config) ini << k << '=' << v << '\n';
  csv::write_file(dir / "config.ini", ini.str());

  json j;
  j["tool"] = "volcast";
  j["version"] = std::string(version());
  j["command"] = m.command;
  j["seed"] = m.config.count("seed") ? m.config.at("seed") : "0";
  j["config"] = m.config;
  j["build"] = {{"compiler", __VERSION__},
                {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION)},
                {"boost", BOOST_LIB_VERSION}};
  json inputs = json::array();
  for (const auto& p : m.inputs) inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  j["inputs"] = std::move(inputs);
  json outputs = json::array();
  auto files = m.outputs;
  files.emplace_back("config.ini");
  for (const auto& p : files)
    outputs.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(dir / p)}});
  j["outputs"] = std::move(outputs);
  csv::write_file(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace volcast
