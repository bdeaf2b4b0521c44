#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace volcast::csv {

/// Splits a single CSV line on commas. Quoting is not supported; fields are
/// trimmed of surrounding whitespace and a trailing '\r'.
std::vector<std::string> split(std::string_view line);

/// Reads every non-empty line of a text file. Throws IoError if unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Parses a decimal number. "nan"/"inf" parse successfully; callers decide
/// whether non-finite values are acceptable. Throws ParseError on garbage.
double parse_double(std::string_view field, std::string_view what);

long long parse_int(std::string_view field, std::string_view what);

/// Shortest representation that parses back to the identical double.
std::string format_double(double value);

/// Normalizes YYYY-MM-DD or YYYYMMDD to YYYY-MM-DD; rejects invalid dates.
std::string normalize_date(std::string_view field);

}  // namespace volcast::csv
