#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace volcast {

using Series = std::vector<double>;

/// Marker for positions without full filter support (leading aggregates,
/// trailing forward targets).
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Intraday log-returns for a set of firms on a shared trading calendar.
/// returns[firm][day] holds that day's M intraday returns in sequence order.
struct IntradayPanel {
  std::vector<std::string> firms;
  std::vector<std::string> days;
  std::vector<std::vector<Series>> returns;

  std::size_t firm_count() const noexcept { return firms.size(); }
  std::size_t day_count() const noexcept { return days.size(); }
};

/// Daily realized measures aligned across firms. All per-measure containers
/// are indexed [firm][day]. When the panel was built from daily RV only,
/// `has_intraday_measures` is false and bpv/rq/jump are empty.
struct RealizedPanel {
  std::vector<std::string> firms;
  std::vector<std::string> days;
  std::vector<Series> rv;
  std::vector<Series> bpv;
  std::vector<Series> rq;
  std::vector<Series> jump;
  std::vector<Series> rv_w;  // trailing 5-day mean
  std::vector<Series> rv_m;  // trailing 22-day mean
  bool has_intraday_measures = false;

  std::size_t firm_count() const noexcept { return firms.size(); }
  std::size_t day_count() const noexcept { return days.size(); }

  /// Index of `firm`; throws InvalidConfig when absent.
  std::size_t firm_index(std::string_view firm) const;
};

/// Long CSV with header `date,firm,seq,return` (any column order).
IntradayPanel load_intraday(const std::filesystem::path& path);
IntradayPanel parse_intraday(const std::vector<std::string>& lines);
void write_intraday(const IntradayPanel& panel, const std::filesystem::path& path);

/// Wide CSV: `date,<firm1>,...` with daily RV values.
RealizedPanel load_daily_rv(const std::filesystem::path& path);
RealizedPanel parse_daily_rv(const std::vector<std::string>& lines);
std::string format_daily_rv(const RealizedPanel& panel);
void write_daily_rv(const RealizedPanel& panel, const std::filesystem::path& path);

/// Wide measures CSV: `date,<firm>:rv,<firm>:bpv,<firm>:rq,<firm>:jump,...`.
std::string format_measures(const RealizedPanel& panel);
void write_measures(const RealizedPanel& panel, const std::filesystem::path& path);
RealizedPanel parse_measures(const std::vector<std::string>& lines);

/// Loads either wide format, detected from the header.
RealizedPanel load_panel(const std::filesystem::path& path);

/// Builds a validated RV-only panel and its weekly/monthly aggregates.
/// Firms are sorted lexicographically; input order is irrelevant.
RealizedPanel make_rv_panel(std::vector<std::string> firms, std::vector<std::string> days,
                            std::vector<Series> rv);

/// Checks the panel invariants (shapes, finiteness, non-negativity, jump identity).
void validate(const RealizedPanel& panel);

struct SummaryRow {
  std::string firm;
  std::size_t n = 0;
  double min = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::optional<double> ar1;  // empty for zero-variance series
};

std::vector<SummaryRow> summarize(const RealizedPanel& panel);
SummaryRow summarize_series(std::string firm, const Series& rv);

/// Fixed-width table, three decimals, missing AR(1) printed as "n/a".
std::string format_summary(const std::vector<SummaryRow>& rows);

}  // namespace volcast
