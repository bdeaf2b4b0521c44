#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "volcast/panel_data.hpp"

namespace volcast {

enum class Variant { HAR, HARQ, HARQ_F, HAR_J, CHAR };
enum class Scope { Benchmark, CrossSection };

std::string_view to_string(Variant v) noexcept;
std::string_view to_string(Scope s) noexcept;
/// Accepts har, harq, harq-f / harq_f, har-j / har_j, char (case-insensitive).
Variant parse_variant(std::string_view text);
Scope parse_scope(std::string_view text);

/// True for variants that need BPV / RQ / jump measures.
bool requires_intraday_measures(Variant v) noexcept;
std::size_t columns_per_firm(Variant v) noexcept;

struct ModelSpec {
  Variant variant = Variant::HAR;
  Scope scope = Scope::Benchmark;
  std::size_t horizon = 1;
};

/// Inclusive bounds on the predictor day index t.
struct DayRange {
  std::size_t first = 0;
  std::size_t last = std::numeric_limits<std::size_t>::max();
};

/// Regression data for one target firm. Row r pairs predictors observed on
/// day rows[r] with the mean RV over days rows[r]+1 .. rows[r]+horizon.
/// The intercept is implicit (not a column of X).
struct DesignMatrix {
  std::vector<std::size_t> rows;
  std::size_t horizon = 1;
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> column_names;
  std::vector<std::size_t> degenerate_columns;  // zero variance over the retained rows

  std::size_t row_count() const noexcept { return rows.size(); }
  std::size_t predictor_day(std::size_t r) const { return rows.at(r); }
  std::size_t target_first_day(std::size_t r) const { return rows.at(r) + 1; }
  std::size_t target_last_day(std::size_t r) const { return rows.at(r) + horizon; }
};

/// Column blocks per in-scope firm, in panel firm order:
///   HAR    RV_d, RV_w, RV_m
///   HARQ   + RV_d×√RQ
///   HARQ_F + RV_d×√RQ, RV_w×√RQ_w, RV_m×√RQ_m
///   HAR_J  + J_d
///   CHAR   BPV_d, BPV_w, BPV_m
/// Rows lacking any predictor or the target are dropped.
DesignMatrix build_design(const RealizedPanel& panel, std::size_t firm, const ModelSpec& spec,
                          DayRange range = {});
DesignMatrix build_design(const RealizedPanel& panel, std::string_view firm,
                          const ModelSpec& spec, DayRange range = {});

enum class ZeroVariancePolicy { Drop, Throw };

/// Column-wise centering and scaling to unit sample standard deviation.
/// `kept` lists the original column indices present in X; constant columns
/// are listed in `dropped` (or raise ZeroVarianceColumn under Throw).
struct Standardization {
  Eigen::MatrixXd X;
  Eigen::VectorXd centers;
  Eigen::VectorXd scales;
  std::vector<std::size_t> kept;
  std::vector<std::size_t> dropped;
  std::size_t original_columns = 0;

  /// Applies the same transform to other rows with the original column layout.
  Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& X_orig) const;
};

Standardization standardize(const Eigen::Ref<const Eigen::MatrixXd>& X,
                            ZeroVariancePolicy policy = ZeroVariancePolicy::Drop);

struct LinearCoefficients {
  double intercept = 0.0;
  Eigen::VectorXd slopes;  // original column layout; dropped columns are 0
};

/// Maps coefficients fitted on standardized columns back to the original scale,
/// so that X β + b equals X_std β_std + b_std.
LinearCoefficients destandardize(const Standardization& st, double intercept_std,
                                 const Eigen::Ref<const Eigen::VectorXd>& beta_std);

}  // namespace volcast
