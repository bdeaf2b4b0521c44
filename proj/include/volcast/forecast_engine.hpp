#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "volcast/har_features.hpp"
#include "volcast/panel_data.hpp"
#include "volcast/scheme.hpp"
#include "volcast/shrinkage.hpp"

namespace volcast {

/// One side of a forecast comparison: which regressors and how they are fitted.
struct ModelConfig {
  ModelSpec spec;
  PenaltyKind penalty = PenaltyKind::None;
  double eta = 0.5;
  double gamma = 1.0;
  std::optional<double> lambda;  // fixed lambda; otherwise chosen by CV
  std::size_t cv_folds = 5;
  std::size_t grid_size = 100;
  double grid_ratio = 1e-4;
  FoldScheme fold_scheme = FoldScheme::Contiguous;
  CvRule cv_rule = CvRule::Min;
  SolverOptions solver;
};

/// "variant[:penalty[:scope]]", e.g. "har:ols", "harq:lasso:cross". Without
/// an explicit scope, OLS models use the firm's own columns and penalized
/// models use the full cross-section.
ModelConfig parse_model(std::string_view text);
std::string model_label(const ModelConfig& m);

struct SchemeConfig {
  Scheme scheme = Scheme::Rolling;
  std::size_t window = 252;  // P (rolling length, or initial size R when expanding)
  std::size_t horizon = 1;
  Loss loss = Loss::Squared;
  std::size_t cv_refresh = 1;  // re-run CV every this many windows
  bool floor_zero = false;
  std::size_t threads = 1;
};

/// A model fitted on standardized training columns.
struct FittedModel {
  Standardization standardization;
  double intercept = 0.0;
  Eigen::VectorXd beta;  // standardized scale, kept columns only
  double lambda = 0.0;
  std::optional<CvResult> cv;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  LinearCoefficients original_scale() const;
  std::vector<std::size_t> active_columns() const;  // original column indices
};

/// Standardizes X, picks lambda (fixed, reused, or by CV) and fits.
/// `reuse_lambda` skips CV when set.
FittedModel fit_model(const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXd>& y, const ModelConfig& model,
                      std::optional<double> reuse_lambda = std::nullopt, std::uint64_t seed = 0);

struct ForecastRun {
  std::string firm;
  std::string bench_label;
  std::string model_label;
  SchemeConfig config;
  std::vector<std::string> dates;      // last day of each forecast target
  std::vector<std::size_t> origins;    // panel day index the forecast is made on
  std::vector<std::size_t> train_end;  // last target day consumed by the fits at each origin
  std::vector<double> actual, f1, f2, e1, e2, L1, L2, d;
  std::vector<double> lambda1, lambda2;  // NaN for unpenalized models

  std::size_t size() const noexcept { return actual.size(); }
};

/// Pseudo out-of-sample comparison of `bench` (1) against `model` (2) for one
/// firm. Both designs are aligned on their common usable rows; with U such
/// rows the run holds U - P - h + 1 forecasts. Throws InsufficientWindow when
/// no origin has P training rows.
ForecastRun run_scheme(const RealizedPanel& panel, std::size_t firm, const ModelConfig& bench,
                       const ModelConfig& model, const SchemeConfig& cfg, std::uint64_t seed = 0);

double loss_value(double error, Loss loss) noexcept;

/// Mean of squared errors. Throws EmptySequence.
double mspe(std::span<const double> errors);

std::string format_run(const ForecastRun& run);
ForecastRun parse_run(std::string_view text);
void write_run(const std::filesystem::path& path, const ForecastRun& run);
ForecastRun read_run(const std::filesystem::path& path);

/// Runs fn(0..n-1) on up to `threads` workers. The exception thrown for the
/// lowest index is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace volcast
