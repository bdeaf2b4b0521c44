#include "volcast/har_features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <utility>

#include "volcast/error.hpp"
#include "volcast/realized_measures.hpp"

namespace volcast {

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::HAR: return "HAR";
    case Variant::HARQ: return "HARQ";
    case Variant::HARQ_F: return "HARQ-F";
    case Variant::HAR_J: return "HAR-J";
    case Variant::CHAR: return "CHAR";
  }
  return "?";
}

std::string_view to_string(Scope s) noexcept {
  return s == Scope::Benchmark ? "bench" : "cross";
}

namespace {

std::string normalized(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c == '-' || c == '_') continue;
    s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

}  // namespace

Variant parse_variant(std::string_view text) {
  const auto s = normalized(text);
  if (s == "har") return Variant::HAR;
  if (s == "harq") return Variant::HARQ;
  if (s == "harqf") return Variant::HARQ_F;
  if (s == "harj") return Variant::HAR_J;
  if (s == "char") return Variant::CHAR;
  throw Error(ErrorCode::InvalidConfig, "unknown model variant '" + std::string(text) + "'");
}

Scope parse_scope(std::string_view text) {
  const auto s = normalized(text);
  if (s == "bench" || s == "benchmark" || s == "own") return Scope::Benchmark;
  if (s == "cross" || s == "crosssection" || s == "cs") return Scope::CrossSection;
  throw Error(ErrorCode::InvalidConfig, "unknown scope '" + std::string(text) + "'");
}

bool requires_intraday_measures(Variant v) noexcept { return v != Variant::HAR; }

std::size_t columns_per_firm(Variant v) noexcept {
  switch (v) {
    case Variant::HAR: return 3;
    case Variant::HARQ: return 4;
    case Variant::HARQ_F: return 6;
    case Variant::HAR_J: return 4;
    case Variant::CHAR: return 3;
  }
  return 0;
}

namespace {

struct NamedSeries {
  std::string name;
  Series values;
};

Series trailing(const Series& s, std::size_t window) {
  if (s.size() < window) return Series(s.size(), kMissing);
  return temporal_average(s, window, AverageMode::Trailing);
}

Series times_sqrt(const Series& level, const Series& quarticity) {
  Series out(level.size());
  for (std::size_t t = 0; t < level.size(); ++t) {
    out[t] = (is_missing(level[t]) || is_missing(quarticity[t]))
                 ? kMissing
                 : level[t] * std::sqrt(quarticity[t]);
  }
  return out;
}

std::vector<NamedSeries> firm_block(const RealizedPanel& panel, std::size_t f, Variant v) {
  const auto tag = "[" + panel.firms[f] + "]";
  std::vector<NamedSeries> cols;
  if (v == Variant::CHAR) {
    const auto& bpv = panel.bpv[f];
    cols.push_back({"BPV_d" + tag, bpv});
    cols.push_back({"BPV_w" + tag, trailing(bpv, kWeeklyWindow)});
    cols.push_back({"BPV_m" + tag, trailing(bpv, kMonthlyWindow)});
    return cols;
  }
  cols.push_back({"RV_d" + tag, panel.rv[f]});
  cols.push_back({"RV_w" + tag, panel.rv_w[f]});
  cols.push_back({"RV_m" + tag, panel.rv_m[f]});
  if (v == Variant::HARQ || v == Variant::HARQ_F) {
    const auto& rq = panel.rq[f];
    cols.push_back({"RV_d×√RQ" + tag, times_sqrt(panel.rv[f], rq)});
    if (v == Variant::HARQ_F) {
      cols.push_back({"RV_w×√RQ_w" + tag, times_sqrt(panel.rv_w[f], trailing(rq, kWeeklyWindow))});
      cols.push_back(
          {"RV_m×√RQ_m" + tag, times_sqrt(panel.rv_m[f], trailing(rq, kMonthlyWindow))});
    }
  }
  if (v == Variant::HAR_J) cols.push_back({"J_d" + tag, panel.jump[f]});
  return cols;
}

}  // namespace

DesignMatrix build_design(const RealizedPanel& panel, std::size_t firm, const ModelSpec& spec,
                          DayRange range) {
  if (firm >= panel.firm_count())
    throw Error(ErrorCode::InvalidConfig, "firm index out of range");
  if (spec.horizon == 0) throw Error(ErrorCode::InvalidConfig, "horizon must be >= 1");
  if (requires_intraday_measures(spec.variant) && !panel.has_intraday_measures)
    throw Error(ErrorCode::MeasureUnavailable,
                std::string(to_string(spec.variant)) +
                    " needs BPV/RQ/jump measures but the panel carries RV only");
  const std::size_t nd = panel.day_count();
  if (nd == 0 || range.first >= nd || range.first > range.last)
    throw Error(ErrorCode::EmptyRangeAfterTrim, "requested range lies outside the panel");
  const std::size_t last = std::min(range.last, nd - 1);

  std::vector<NamedSeries> columns;
  if (spec.scope == Scope::Benchmark) {
    columns = firm_block(panel, firm, spec.variant);
  } else {
    for (std::size_t f = 0; f < panel.firm_count(); ++f) {
      auto block = firm_block(panel, f, spec.variant);
      std::move(block.begin(), block.end(), std::back_inserter(columns));
    }
  }

  const Series target = spec.horizon < nd
                            ? temporal_average(panel.rv[firm], spec.horizon, AverageMode::Forward)
                            : Series(nd, kMissing);

  DesignMatrix dm;
  dm.horizon = spec.horizon;
  for (std::size_t t = range.first; t <= last; ++t) {
    if (is_missing(target[t])) continue;
    const bool complete = std::none_of(columns.begin(), columns.end(),
                                       [t](const NamedSeries& c) { return is_missing(c.values[t]); });
    if (complete) dm.rows.push_back(t);
  }
  if (dm.rows.empty())
    throw Error(ErrorCode::EmptyRangeAfterTrim,
                "no rows with complete predictors and target for firm " + panel.firms[firm]);

  const auto n = static_cast<Eigen::Index>(dm.rows.size());
  const auto p = static_cast<Eigen::Index>(columns.size());
  dm.y.resize(n);
  dm.X.resize(n, p);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto t = dm.rows[static_cast<std::size_t>(r)];
    dm.y(r) = target[t];
    for (Eigen::Index c = 0; c < p; ++c) dm.X(r, c) = columns[static_cast<std::size_t>(c)].values[t];
  }
  for (Eigen::Index c = 0; c < p; ++c) {
    dm.column_names.push_back(std::move(columns[static_cast<std::size_t>(c)].name));
    if (dm.X.col(c).maxCoeff() == dm.X.col(c).minCoeff())
      dm.degenerate_columns.push_back(static_cast<std::size_t>(c));
  }
  return dm;
}

DesignMatrix build_design(const RealizedPanel& panel, std::string_view firm,
                          const ModelSpec& spec, DayRange range) {
  return build_design(panel, panel.firm_index(firm), spec, range);
}

Eigen::MatrixXd Standardization::transform(const Eigen::Ref<const Eigen::MatrixXd>& X_orig) const {
  if (static_cast<std::size_t>(X_orig.cols()) != original_columns)
    throw Error(ErrorCode::InvalidConfig, "column count differs from standardized design");
  Eigen::MatrixXd out(X_orig.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(kept[k]);
    const auto kk = static_cast<Eigen::Index>(k);
    out.col(kk) = (X_orig.col(j).array() - centers(kk)) / scales(kk);
  }
  return out;
}

Standardization standardize(const Eigen::Ref<const Eigen::MatrixXd>& X, ZeroVariancePolicy policy) {
  Standardization st;
  st.original_columns = static_cast<std::size_t>(X.cols());
  const auto n = X.rows();
  std::vector<double> centers, scales;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mean = n > 0 ? X.col(j).mean() : 0.0;
    double sd = 0.0;
    if (n > 1) sd = std::sqrt((X.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
    if (!std::isfinite(mean) || !std::isfinite(sd))
      throw Error(ErrorCode::NonFiniteInput, "column " + std::to_string(j) + " is not finite");
    if (sd <= 1e-12 * std::abs(mean) || sd == 0.0) {
      if (policy == ZeroVariancePolicy::Throw)
        throw Error(ErrorCode::ZeroVarianceColumn, "column " + std::to_string(j) + " is constant");
      st.dropped.push_back(static_cast<std::size_t>(j));
      continue;
    }
    st.kept.push_back(static_cast<std::size_t>(j));
    centers.push_back(mean);
    scales.push_back(sd);
  }
  st.centers = Eigen::Map<Eigen::VectorXd>(centers.data(), static_cast<Eigen::Index>(centers.size()));
  st.scales = Eigen::Map<Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));
  st.X = st.transform(X);
  return st;
}

LinearCoefficients destandardize(const Standardization& st, double intercept_std,
                                 const Eigen::Ref<const Eigen::VectorXd>& beta_std) {
  if (static_cast<std::size_t>(beta_std.size()) != st.kept.size())
    throw Error(ErrorCode::InvalidConfig, "coefficient count differs from kept columns");
  LinearCoefficients out;
  out.slopes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(st.original_columns));
  out.intercept = intercept_std;
  for (std::size_t k = 0; k < st.kept.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double b = beta_std(kk) / st.scales(kk);
    out.slopes(static_cast<Eigen::Index>(st.kept[k])) = b;
    out.intercept -= b * st.centers(kk);
  }
  return out;
}

}  // namespace volcast
