#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace volcast {

enum class PenaltyKind { None, Lasso, AdaptiveLasso, ElasticNet };

std::string_view to_string(PenaltyKind k) noexcept;
/// ols|none, lasso, alasso|adaptive, enet|elastic (case-insensitive).
PenaltyKind parse_penalty(std::string_view text);

/// Penalty on the slope coefficients. The intercept is never penalized.
///
/// The fitted objective is
///   (1 / 2T) * sum_t (y_t - b0 - x_t' beta)^2 + lambda * sum_j [ a w_j |beta_j| + (1 - a) beta_j^2 ]
/// where a = eta for ElasticNet and a = 1 otherwise. `weights` defaults to
/// all ones; AdaptiveLasso callers fill it from adaptive_weights().
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Lasso;
  double lambda = 0.0;
  double eta = 0.5;
  double gamma = 1.0;
  Eigen::VectorXd weights;

  /// Throws InvalidConfig when lambda < 0, eta outside [0,1], gamma <= 0,
  /// or weights are negative, non-finite, or of the wrong length.
  void validate(std::size_t p) const;

  double l1_mix() const noexcept { return kind == PenaltyKind::ElasticNet ? eta : 1.0; }
  double weight(std::size_t j) const noexcept {
    return weights.size() == 0 ? 1.0 : weights(static_cast<Eigen::Index>(j));
  }
  double effective_lambda() const noexcept { return kind == PenaltyKind::None ? 0.0 : lambda; }
};

struct SolverOptions {
  double tol = 1e-7;
  std::size_t max_iter = 100000;
};

struct PenaltyFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  std::vector<std::size_t> active_set;
  double lambda = 0.0;
  double objective = 0.0;
  std::size_t iterations = 0;  // coordinate sweeps
  bool converged = false;
  Eigen::VectorXd penalty_weights;  // weights actually used (empty = all ones)
};

struct OlsFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
};

/// sign(z) * max(|z| - t, 0).
double soft_threshold(double z, double t) noexcept;

/// Least squares via the normal equations. Throws SingularDesign when the
/// (centered) cross-product matrix has condition number above 1e12.
OlsFit fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
               bool intercept = true);

double penalty_value(const Eigen::Ref<const Eigen::VectorXd>& beta, const PenaltySpec& spec);

/// Full objective evaluated directly from the data.
double penalized_objective(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y, double intercept,
                           const Eigen::Ref<const Eigen::VectorXd>& beta, const PenaltySpec& spec);

/// Cyclic coordinate descent in fixed column order, followed by an exact
/// solve on the converged active set when that solve keeps every sign and
/// the inactive KKT conditions. Convergence is declared when the largest
/// coefficient change, measured in units of sd(y)/sd(x_j), falls below tol.
/// AdaptiveLasso with empty weights derives them from pilot_coefficients()
/// on the same data. Throws NotConverged or NonFiniteInput.
PenaltyFit fit_penalized(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltySpec& spec,
                         const SolverOptions& options = {});

/// Fits every lambda in `grid` (order preserved) with warm starts.
std::vector<PenaltyFit> fit_path(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const Eigen::Ref<const Eigen::VectorXd>& y, PenaltySpec spec,
                                 const std::vector<double>& grid, const SolverOptions& options = {});

/// Largest KKT violation of `fit` (0 means exactly stationary).
double kkt_violation(const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltyFit& fit,
                     const PenaltySpec& spec);

inline constexpr double kAdaptiveWeightFloor = 1e-6;

/// 1 / max(|pilot_j|, floor)^gamma.
Eigen::VectorXd adaptive_weights(const Eigen::Ref<const Eigen::VectorXd>& pilot, double gamma,
                                 double floor = kAdaptiveWeightFloor);

/// OLS slopes when p < 0.9 T and the design is well conditioned, otherwise
/// ridge slopes with penalty 1e-3 on the same 1/(2T) scale.
Eigen::VectorXd pilot_coefficients(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// Smallest lambda at which every slope is exactly zero.
double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltySpec& spec);

/// `n_grid` log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> lambda_grid(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltySpec& spec,
                                std::size_t n_grid = 100, double ratio = 1e-4);

enum class FoldScheme { Contiguous, Shuffled };

/// Min: the grid argmin. OneStandardError: the largest lambda whose error is
/// within one standard error (across folds) of the minimum.
enum class CvRule { Min, OneStandardError };

struct CvOptions {
  std::size_t folds = 5;
  FoldScheme scheme = FoldScheme::Contiguous;
  CvRule rule = CvRule::Min;
  std::uint64_t seed = 0;
  SolverOptions solver;
};

struct CvResult {
  std::vector<double> lambda_grid;
  std::vector<double> cv_error;  // mean out-of-fold squared error per lambda
  std::vector<double> cv_se;     // standard error of the per-fold mean errors
  std::size_t min_index = 0;     // argmin of cv_error
  double lambda = 0.0;
  std::size_t chosen_index = 0;
  std::size_t folds = 0;
  std::vector<std::size_t> fold_of_row;
};

/// Fold label per row. Contiguous: κ consecutive blocks whose sizes differ by
/// at most one. Shuffled: the same block sizes over a seeded permutation.
std::vector<std::size_t> assign_folds(std::size_t rows, std::size_t folds, FoldScheme scheme,
                                      std::uint64_t seed);

/// K-fold selection of lambda from `grid` (descending). Ties resolve toward
/// the larger lambda. `spec.lambda` is ignored.
CvResult cross_validate(const Eigen::Ref<const Eigen::MatrixXd>& X,
                        const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltySpec& spec,
                        const std::vector<double>& grid, const CvOptions& options = {});

}  // namespace volcast
