#include "volcast/realized_measures.hpp"

#include <algorithm>
#include <string>

#include "volcast/error.hpp"

namespace volcast {

double compute_rv(std::span<const double> returns) {
  if (returns.empty()) throw Error(ErrorCode::EmptyDay, "no intraday returns");
  double sum = 0.0;
  for (double r : returns) sum += r * r;
  return sum;
}

double compute_bpv(std::span<const double> returns) {
  if (returns.size() < 2)
    throw Error(ErrorCode::TooFewIntraday, "bipower variation needs at least 2 returns, got " +
                                               std::to_string(returns.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < returns.size(); ++i)
    sum += std::abs(returns[i]) * std::abs(returns[i + 1]);
  return sum / (kMu1 * kMu1);
}

double compute_rq(std::span<const double> returns) {
  if (returns.empty()) throw Error(ErrorCode::EmptyDay, "no intraday returns");
  double sum = 0.0;
  for (double r : returns) {
    const double r2 = r * r;
    sum += r2 * r2;
  }
  return static_cast<double>(returns.size()) / 3.0 * sum;
}

double compute_jump(double rv, double bpv) noexcept { return std::max(rv - bpv, 0.0); }

MeasureSet compute_measures(std::span<const double> returns) {
  MeasureSet m;
  m.rv = compute_rv(returns);
  m.bpv = compute_bpv(returns);
  m.rq = compute_rq(returns);
  m.jump = compute_jump(m.rv, m.bpv);
  return m;
}

Series temporal_average(std::span<const double> series, std::size_t window, AverageMode mode) {
  if (window == 0) throw Error(ErrorCode::InvalidConfig, "averaging window must be >= 1");
  if (window > series.size())
    throw Error(ErrorCode::WindowExceedsSeries,
                "window " + std::to_string(window) + " exceeds series length " +
                    std::to_string(series.size()));

  const std::size_t n = series.size();
  const double w = static_cast<double>(window);
  Series out(n, kMissing);
  auto mean_of = [&](std::size_t first) {
    double sum = 0.0;
    for (std::size_t k = first; k < first + window; ++k) {
      if (is_missing(series[k])) return kMissing;
      sum += series[k];
    }
    return sum / w;
  };

  if (mode == AverageMode::Trailing) {
    for (std::size_t t = window - 1; t < n; ++t) out[t] = mean_of(t + 1 - window);
  } else {
    for (std::size_t t = 0; t + window < n; ++t) out[t] = mean_of(t + 1);
  }
  return out;
}

void fill_aggregates(RealizedPanel& panel) {
  panel.rv_w.assign(panel.firm_count(), {});
  panel.rv_m.assign(panel.firm_count(), {});
  for (std::size_t f = 0; f < panel.firm_count(); ++f) {
    const auto& rv = panel.rv[f];
    panel.rv_w[f] = rv.size() >= kWeeklyWindow
                        ? temporal_average(rv, kWeeklyWindow, AverageMode::Trailing)
                        : Series(rv.size(), kMissing);
    panel.rv_m[f] = rv.size() >= kMonthlyWindow
                        ? temporal_average(rv, kMonthlyWindow, AverageMode::Trailing)
                        : Series(rv.size(), kMissing);
  }
}

RealizedPanel build_realized_panel(const IntradayPanel& intraday) {
  RealizedPanel panel;
  panel.firms = intraday.firms;
  panel.days = intraday.days;
  const std::size_t nf = intraday.firm_count();
  const std::size_t nd = intraday.day_count();
  panel.rv.assign(nf, Series(nd));
  panel.bpv.assign(nf, Series(nd));
  panel.rq.assign(nf, Series(nd));
  panel.jump.assign(nf, Series(nd));
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t d = 0; d < nd; ++d) {
      try {
        const auto m = compute_measures(intraday.returns[f][d]);
        panel.rv[f][d] = m.rv;
        panel.bpv[f][d] = m.bpv;
        panel.rq[f][d] = m.rq;
        panel.jump[f][d] = m.jump;
      } catch (const Error& e) {
        rethrow_with_context(e, "firm " + intraday.firms[f] + " date " + intraday.days[d]);
      }
    }
  }
  panel.has_intraday_measures = true;
  fill_aggregates(panel);
  return panel;
}

}  // namespace volcast
