#include "volcast/panel_data.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "volcast/csv.hpp"
#include "volcast/error.hpp"
#include "volcast/realized_measures.hpp"

namespace volcast {

std::size_t RealizedPanel::firm_index(std::string_view firm) const {
  const auto it = std::find(firms.begin(), firms.end(), firm);
  if (it == firms.end())
    throw Error(ErrorCode::InvalidConfig, "unknown firm '" + std::string(firm) + "'");
  return static_cast<std::size_t>(it - firms.begin());
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::size_t require_column(const std::vector<std::string>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (lower(header[i]) == name) return i;
  throw Error(ErrorCode::MissingColumn, "required column '" + std::string(name) + "' not found");
}

void check_rv_value(double v, const std::string& firm, const std::string& date) {
  if (!std::isfinite(v))
    throw Error(ErrorCode::NonFiniteValue, "firm " + firm + " date " + date);
  if (v < 0.0)
    throw Error(ErrorCode::NegativeRV,
                "firm " + firm + " date " + date + " value " + csv::format_double(v));
}

// Permutation that sorts firm names lexicographically.
std::vector<std::size_t> sorted_order(const std::vector<std::string>& firms) {
  std::vector<std::size_t> idx(firms.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return firms[a] < firms[b]; });
  return idx;
}

struct WideTable {
  std::vector<std::string> columns;  // excluding date
  std::vector<std::string> days;
  std::vector<Series> values;  // [column][day]
};

// Shared reader for both wide formats: rows sorted by date, every cell present.
WideTable parse_wide(const std::vector<std::string>& lines) {
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty file");
  const auto header = csv::split(lines.front());
  if (header.empty() || lower(header.front()) != "date")
    throw Error(ErrorCode::MissingColumn, "first column must be 'date'");
  if (header.size() < 2) throw Error(ErrorCode::MissingColumn, "no firm columns");

  WideTable t;
  t.columns.assign(header.begin() + 1, header.end());
  std::set<std::string> seen;
  for (const auto& c : t.columns) {
    if (c.empty()) throw Error(ErrorCode::ParseError, "empty column name");
    if (!seen.insert(c).second) throw Error(ErrorCode::ParseError, "duplicate column " + c);
  }

  std::map<std::string, std::vector<double>> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = csv::split(lines[li]);
    if (fields.size() != header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(li + 1) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(header.size()));
    const auto date = csv::normalize_date(fields[0]);
    std::vector<double> values(t.columns.size());
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (fields[c + 1].empty())
        throw Error(ErrorCode::NonAlignedCalendar,
                    "column " + t.columns[c] + " has no value on " + date);
      values[c] = csv::parse_double(fields[c + 1], "value for " + t.columns[c] + " on " + date);
    }
    if (!rows.emplace(date, std::move(values)).second)
      throw Error(ErrorCode::ParseError, "duplicate date " + date);
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "no data rows");

  t.values.assign(t.columns.size(), Series{});
  for (auto& v : t.values) v.reserve(rows.size());
  for (const auto& [date, values] : rows) {
    t.days.push_back(date);
    for (std::size_t c = 0; c < values.size(); ++c) t.values[c].push_back(values[c]);
  }
  return t;
}

}  // namespace

IntradayPanel parse_intraday(const std::vector<std::string>& lines) {
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty file");
  const auto header = csv::split(lines.front());
  const auto c_date = require_column(header, "date");
  const auto c_firm = require_column(header, "firm");
  const auto c_seq = require_column(header, "seq");
  const auto c_ret = require_column(header, "return");

  // firm -> date -> (seq, return)
  std::map<std::string, std::map<std::string, std::vector<std::pair<long long, double>>>> cells;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = csv::split(lines[li]);
    if (fields.size() != header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(li + 1) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(header.size()));
    const auto date = csv::normalize_date(fields[c_date]);
    const auto& firm = fields[c_firm];
    if (firm.empty()) throw Error(ErrorCode::ParseError, "empty firm on line " + std::to_string(li + 1));
    const auto seq = csv::parse_int(fields[c_seq], "seq");
    const double r = csv::parse_double(fields[c_ret], "return");
    if (!std::isfinite(r))
      throw Error(ErrorCode::NonFiniteValue, "firm " + firm + " date " + date + " seq " +
                                                 std::to_string(seq));
    cells[firm][date].emplace_back(seq, r);
  }
  if (cells.empty()) throw Error(ErrorCode::ParseError, "no data rows");

  std::set<std::string> all_days;
  for (const auto& [firm, by_date] : cells)
    for (const auto& [date, _] : by_date) all_days.insert(date);
  for (const auto& [firm, by_date] : cells)
    for (const auto& date : all_days)
      if (!by_date.contains(date))
        throw Error(ErrorCode::NonAlignedCalendar,
                    "firm " + firm + " has no returns on " + date + " which other firms have");

  IntradayPanel panel;
  panel.days.assign(all_days.begin(), all_days.end());
  for (auto& [firm, by_date] : cells) {
    panel.firms.push_back(firm);
    std::vector<Series> days;
    days.reserve(by_date.size());
    for (auto& [date, obs] : by_date) {
      std::sort(obs.begin(), obs.end());
      for (std::size_t k = 1; k < obs.size(); ++k)
        if (obs[k].first == obs[k - 1].first)
          throw Error(ErrorCode::ParseError, "firm " + firm + " date " + date +
                                                 " repeats seq " + std::to_string(obs[k].first));
      if (obs.size() < 2)
        throw Error(ErrorCode::TooFewIntraday,
                    "firm " + firm + " date " + date + " has fewer than 2 intraday returns");
      Series r;
      r.reserve(obs.size());
      for (const auto& [_, v] : obs) r.push_back(v);
      days.push_back(std::move(r));
    }
    panel.returns.push_back(std::move(days));
  }
  return panel;
}

IntradayPanel load_intraday(const std::filesystem::path& path) {
  return parse_intraday(csv::read_lines(path));
}

void write_intraday(const IntradayPanel& panel, const std::filesystem::path& path) {
  std::string out = "date,firm,seq,return\n";
  for (std::size_t f = 0; f < panel.firm_count(); ++f)
    for (std::size_t d = 0; d < panel.day_count(); ++d) {
      const auto& r = panel.returns[f][d];
      for (std::size_t k = 0; k < r.size(); ++k) {
        out += panel.days[d];
        out += ',';
        out += panel.firms[f];
        out += ',';
        out += std::to_string(k);
        out += ',';
        out += csv::format_double(r[k]);
        out += '\n';
      }
    }
  csv::write_file(path, out);
}

RealizedPanel make_rv_panel(std::vector<std::string> firms, std::vector<std::string> days,
                            std::vector<Series> rv) {
  if (firms.size() != rv.size())
    throw Error(ErrorCode::InvalidConfig, "firm count does not match RV series count");
  if (firms.empty()) throw Error(ErrorCode::InvalidConfig, "panel has no firms");
  const auto order = sorted_order(firms);
  RealizedPanel panel;
  panel.days = std::move(days);
  for (auto i : order) {
    panel.firms.push_back(firms[i]);
    panel.rv.push_back(std::move(rv[i]));
  }
  for (std::size_t f = 0; f < panel.firm_count(); ++f) {
    if (panel.rv[f].size() != panel.day_count())
      throw Error(ErrorCode::NonAlignedCalendar, "firm " + panel.firms[f] + " series length " +
                                                     std::to_string(panel.rv[f].size()) +
                                                     " differs from calendar length " +
                                                     std::to_string(panel.day_count()));
    for (std::size_t d = 0; d < panel.day_count(); ++d)
      check_rv_value(panel.rv[f][d], panel.firms[f], panel.days[d]);
  }
  panel.has_intraday_measures = false;
  fill_aggregates(panel);
  return panel;
}

RealizedPanel parse_daily_rv(const std::vector<std::string>& lines) {
  auto table = parse_wide(lines);
  return make_rv_panel(std::move(table.columns), std::move(table.days), std::move(table.values));
}

RealizedPanel load_daily_rv(const std::filesystem::path& path) {
  return parse_daily_rv(csv::read_lines(path));
}

std::string format_daily_rv(const RealizedPanel& panel) {
  std::string out = "date";
  for (const auto& f : panel.firms) out += "," + f;
  out += '\n';
  for (std::size_t d = 0; d < panel.day_count(); ++d) {
    out += panel.days[d];
    for (std::size_t f = 0; f < panel.firm_count(); ++f) {
      out += ',';
      out += csv::format_double(panel.rv[f][d]);
    }
    out += '\n';
  }
  return out;
}

void write_daily_rv(const RealizedPanel& panel, const std::filesystem::path& path) {
  csv::write_file(path, format_daily_rv(panel));
}

std::string format_measures(const RealizedPanel& panel) {
  if (!panel.has_intraday_measures)
    throw Error(ErrorCode::MeasureUnavailable, "panel carries RV only");
  std::string out = "date";
  for (const auto& f : panel.firms) out += "," + f + ":rv," + f + ":bpv," + f + ":rq," + f + ":jump";
  out += '\n';
  for (std::size_t d = 0; d < panel.day_count(); ++d) {
    out += panel.days[d];
    for (std::size_t f = 0; f < panel.firm_count(); ++f) {
      for (const auto* m : {&panel.rv, &panel.bpv, &panel.rq, &panel.jump}) {
        out += ',';
        out += csv::format_double((*m)[f][d]);
      }
    }
    out += '\n';
  }
  return out;
}

void write_measures(const RealizedPanel& panel, const std::filesystem::path& path) {
  csv::write_file(path, format_measures(panel));
}

RealizedPanel parse_measures(const std::vector<std::string>& lines) {
  auto table = parse_wide(lines);
  // firm -> measure -> column index
  std::map<std::string, std::map<std::string, std::size_t>> layout;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& name = table.columns[c];
    const auto colon = name.rfind(':');
    if (colon == std::string::npos || colon == 0)
      throw Error(ErrorCode::ParseError, "measure column '" + name + "' is not <firm>:<measure>");
    layout[name.substr(0, colon)][lower(name.substr(colon + 1))] = c;
  }

  RealizedPanel panel;
  panel.days = table.days;
  for (const auto& [firm, measures] : layout) {
    for (const char* m : {"rv", "bpv", "rq", "jump"})
      if (!measures.contains(m))
        throw Error(ErrorCode::MissingColumn, "firm " + firm + " lacks column " + m);
    if (measures.size() != 4)
      throw Error(ErrorCode::ParseError, "firm " + firm + " has unknown measure columns");
    panel.firms.push_back(firm);
    panel.rv.push_back(std::move(table.values[measures.at("rv")]));
    panel.bpv.push_back(std::move(table.values[measures.at("bpv")]));
    panel.rq.push_back(std::move(table.values[measures.at("rq")]));
    panel.jump.push_back(std::move(table.values[measures.at("jump")]));
  }
  panel.has_intraday_measures = true;
  for (std::size_t f = 0; f < panel.firm_count(); ++f)
    for (std::size_t d = 0; d < panel.day_count(); ++d)
      for (const auto* m : {&panel.rv, &panel.bpv, &panel.rq, &panel.jump})
        check_rv_value((*m)[f][d], panel.firms[f], panel.days[d]);
  fill_aggregates(panel);
  validate(panel);
  return panel;
}

RealizedPanel load_panel(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "empty file " + path.string());
  if (lines.front().find(':') != std::string::npos) return parse_measures(lines);
  return parse_daily_rv(lines);
}

void validate(const RealizedPanel& panel) {
  const auto nf = panel.firm_count();
  const auto nd = panel.day_count();
  auto check_shape = [&](const std::vector<Series>& m, const char* name) {
    if (m.size() != nf)
      throw Error(ErrorCode::InvalidConfig, std::string(name) + " has wrong firm count");
    for (std::size_t f = 0; f < nf; ++f)
      if (m[f].size() != nd)
        throw Error(ErrorCode::NonAlignedCalendar,
                    std::string(name) + " for firm " + panel.firms[f] + " has wrong length");
  };
  check_shape(panel.rv, "rv");
  check_shape(panel.rv_w, "rv_w");
  check_shape(panel.rv_m, "rv_m");
  for (std::size_t d = 1; d < nd; ++d)
    if (!(panel.days[d - 1] < panel.days[d]))
      throw Error(ErrorCode::NonAlignedCalendar, "dates are not strictly ascending at " + panel.days[d]);
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t d = 0; d < nd; ++d) check_rv_value(panel.rv[f][d], panel.firms[f], panel.days[d]);
  if (!panel.has_intraday_measures) return;
  check_shape(panel.bpv, "bpv");
  check_shape(panel.rq, "rq");
  check_shape(panel.jump, "jump");
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t d = 0; d < nd; ++d) {
      check_rv_value(panel.bpv[f][d], panel.firms[f], panel.days[d]);
      check_rv_value(panel.rq[f][d], panel.firms[f], panel.days[d]);
      if (panel.jump[f][d] != compute_jump(panel.rv[f][d], panel.bpv[f][d]))
        throw Error(ErrorCode::InvalidConfig, "jump != max(rv - bpv, 0) for firm " +
                                                  panel.firms[f] + " date " + panel.days[d]);
    }
}

SummaryRow summarize_series(std::string firm, const Series& rv) {
  if (rv.size() < 2)
    throw Error(ErrorCode::TooFewObservations,
                "firm " + firm + " has " + std::to_string(rv.size()) + " observations");
  SummaryRow row;
  row.firm = std::move(firm);
  row.n = rv.size();
  row.min = *std::min_element(rv.begin(), rv.end());
  row.max = *std::max_element(rv.begin(), rv.end());
  row.mean = std::accumulate(rv.begin(), rv.end(), 0.0) / static_cast<double>(rv.size());
  Series sorted = rv;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  row.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  // OLS slope of rv_t on rv_{t-1} with an intercept.
  const std::size_t m = n - 1;
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    mx += rv[t - 1];
    my += rv[t];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t t = 1; t < n; ++t) {
    sxx += (rv[t - 1] - mx) * (rv[t - 1] - mx);
    sxy += (rv[t - 1] - mx) * (rv[t] - my);
  }
  const double scale = std::max(1.0, mx * mx) * static_cast<double>(m);
  if (sxx > 1e-24 * scale) row.ar1 = sxy / sxx;
  return row;
}

std::vector<SummaryRow> summarize(const RealizedPanel& panel) {
  std::vector<SummaryRow> rows;
  rows.reserve(panel.firm_count());
  for (std::size_t f = 0; f < panel.firm_count(); ++f)
    rows.push_back(summarize_series(panel.firms[f], panel.rv[f]));
  return rows;
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s %10s %10s %8s\n", "Symbol", "Min", "Mean",
                "Median", "Max", "AR(1)");
  os << buf;
  for (const auto& r : rows) {
    char ar[32];
    if (r.ar1)
      std::snprintf(ar, sizeof ar, "%.3f", *r.ar1);
    else
      std::snprintf(ar, sizeof ar, "n/a");
    std::snprintf(buf, sizeof buf, "%-10s %10.3f %10.3f %10.3f %10.3f %8s\n", r.firm.c_str(), r.min,
                  r.mean, r.median, r.max, ar);
    os << buf;
  }
  return os.str();
}

}  // namespace volcast
