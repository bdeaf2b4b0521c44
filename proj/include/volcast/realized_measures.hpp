#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

#include "volcast/panel_data.hpp"

namespace volcast {

/// E|Z| for standard normal Z.
inline const double kMu1 = std::sqrt(2.0 / std::numbers::pi);

struct MeasureSet {
  double rv = 0.0;
  double bpv = 0.0;
  double rq = 0.0;
  double jump = 0.0;
};

/// Sum of squared intraday returns. Throws EmptyDay on an empty day.
double compute_rv(std::span<const double> returns);

/// Bipower variation mu1^{-2} * sum |r_i||r_{i+1}|. Needs at least two returns.
double compute_bpv(std::span<const double> returns);

/// Realized quarticity (M/3) * sum r^4.
double compute_rq(std::span<const double> returns);

/// max(rv - bpv, 0).
double compute_jump(double rv, double bpv) noexcept;

MeasureSet compute_measures(std::span<const double> returns);

enum class AverageMode {
  Trailing,  // mean of the current and window-1 prior values
  Forward,   // mean of the next `window` values (multi-horizon target)
};

/// Equal-weight temporal filter. Positions without full support, or whose
/// support contains a missing value, are kMissing. Throws WindowExceedsSeries
/// when `window` is larger than the series and InvalidConfig when it is 0.
Series temporal_average(std::span<const double> series, std::size_t window, AverageMode mode);

/// Daily RV/BPV/RQ/jump for every (firm, day) plus the RV aggregates.
RealizedPanel build_realized_panel(const IntradayPanel& intraday);

/// Recomputes rv_w and rv_m from rv.
void fill_aggregates(RealizedPanel& panel);

inline constexpr std::size_t kWeeklyWindow = 5;
inline constexpr std::size_t kMonthlyWindow = 22;

}  // namespace volcast
