#include "volcast/csv.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "volcast/error.hpp"

namespace volcast::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(trim(line.substr(start)));
      break;
    }
    out.emplace_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

double parse_double(std::string_view field, std::string_view what) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    // from_chars does not accept every spelling of nan/inf; handle the usual ones.
    std::string lower(field);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "nan" || lower == "-nan") return std::nan("");
    if (lower == "inf" || lower == "infinity") return INFINITY;
    if (lower == "-inf" || lower == "-infinity") return -INFINITY;
    throw Error(ErrorCode::ParseError,
                "cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
  }
  return value;
}

long long parse_int(std::string_view field, std::string_view what) {
  field = trim(field);
  long long value = 0;
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), last, value);
  if (field.empty() || ec != std::errc() || ptr != last)
    throw Error(ErrorCode::ParseError,
                "cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "cannot format number");
  return std::string(buf, ptr);
}

std::string normalize_date(std::string_view field) {
  field = trim(field);
  std::string digits;
  if (field.size() == 10 && field[4] == '-' && field[7] == '-') {
    digits = std::string(field.substr(0, 4)) + std::string(field.substr(5, 2)) +
             std::string(field.substr(8, 2));
  } else if (field.size() == 8) {
    digits = std::string(field);
  } else {
    throw Error(ErrorCode::ParseError, "invalid ISO-8601 date '" + std::string(field) + "'");
  }
  for (char c : digits)
    if (c < '0' || c > '9')
      throw Error(ErrorCode::ParseError, "invalid ISO-8601 date '" + std::string(field) + "'");

  const int y = std::stoi(digits.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(digits.substr(4, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(digits.substr(6, 2)));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok())
    throw Error(ErrorCode::ParseError, "invalid calendar date '" + std::string(field) + "'");
  return digits.substr(0, 4) + "-" + digits.substr(4, 2) + "-" + digits.substr(6, 2);
}

}  // namespace volcast::csv
