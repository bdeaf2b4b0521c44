#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "volcast/epa_tests.hpp"
#include "volcast/panel_data.hpp"

namespace volcast {

/// splitmix64 of (seed, stream); used to give every firm / replication its own RNG.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// `count` weekday dates starting at `start` (YYYY-MM-DD).
std::vector<std::string> business_days(std::size_t count, std::string_view start = "2000-01-03");

enum class VolModel { Constant, SquareRoot };

/// Intraday price DGP. Time is measured in trading days; each day has M
/// Euler steps of length 1/M. Variance parameters are daily rates, and the
/// defaults express returns in percent (daily variance 1 = 1% daily vol).
struct DgpConfig {
  std::size_t firms = 1;
  std::size_t days = 250;
  std::size_t steps = 390;  // M
  double drift = 0.0;
  VolModel vol = VolModel::SquareRoot;
  double sigma2 = 1.0;      // constant variance, and the initial variance of the SV process
  double kappa_v = 0.02;    // mean reversion per day
  double theta_v = 1.0;     // long-run variance
  double xi_v = 0.15;       // vol of variance
  double rho = 0.0;         // correlation of price and variance shocks
  double jump_intensity = 0.0;  // expected jumps per day
  double jump_sd = 0.0;         // jump sizes ~ N(0, jump_sd^2)
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Named parameter sets (ours; none are calibrated to a dataset):
/// "constant", "sv", "sv-jumps".
DgpConfig dgp_preset(std::string_view name);

struct DayTruth {
  double iv = 0.0;  // sum of sigma^2 * dt over the day's steps
  double jv = 0.0;  // sum of squared jump sizes
  std::size_t jumps = 0;
};

struct SimulatedPaths {
  IntradayPanel intraday;
  std::vector<std::vector<DayTruth>> truth;  // [firm][day]
};

SimulatedPaths simulate_paths(const DgpConfig& cfg);

/// CSV with header date,firm,iv,jv,jumps.
std::string format_truth(const SimulatedPaths& sim);

/// Cross-section HAR recursion
///   RV_{i,t+1} = c_i + sum_j [Phi_{i,3j} RV_{j,t} + Phi_{i,3j+1} RV^w_{j,t} + Phi_{i,3j+2} RV^m_{j,t}] + e_{i,t+1}
/// with e uniform on [-sqrt(3) sd, sqrt(3) sd] (independent, homoskedastic).
/// Columns of Phi follow the cross-section design order for firms F01..FNN.
struct HarPanelConfig {
  std::size_t days = 1000;
  std::size_t burn_in = 500;
  Eigen::VectorXd intercepts;  // N
  Eigen::MatrixXd phi;         // N x 3N
  double noise_sd = 0.1;
  std::uint64_t seed = 0;

  std::size_t firms() const noexcept { return static_cast<std::size_t>(intercepts.size()); }
  void validate() const;
};

/// Own-firm (block diagonal) coefficient matrix.
Eigen::MatrixXd benchmark_phi(std::size_t firms, double beta_d, double beta_w, double beta_m);

struct HarPanel {
  RealizedPanel panel;
  Eigen::VectorXd intercepts;
  Eigen::MatrixXd phi;
};

/// Throws ExplosiveDynamics when RV exceeds 1e6 times its running median,
/// InvalidConfig when a draw turns negative.
HarPanel simulate_har_panel(const HarPanelConfig& cfg);

/// Firm names used by the simulators: F01, F02, ...
std::string sim_firm_name(std::size_t index, std::size_t firms);

struct SparseRegression {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd beta;
};

/// y = X beta + e with iid N(0,1) columns and N(0, noise_sd^2) errors.
SparseRegression simulate_sparse_regression(std::size_t rows, const Eigen::VectorXd& beta,
                                            double noise_sd, std::uint64_t seed);

enum class Hypothesis { Null, Alternative };

struct ForecastPair {
  std::vector<double> y, f1, f2, e1, e2;
};

/// Non-nested pair. Under the null the two error sequences are exchangeable;
/// under the alternative the second forecast's MSPE is (1 - reduction) times
/// the first's.
ForecastPair simulate_exchangeable_pair(std::size_t n, Hypothesis h, double reduction,
                                        std::uint64_t seed);

/// Nested pair: y_{t+1} = b x_t + e_{t+1}; forecast 1 is 0, forecast 2 is a
/// rolling OLS slope (window `window`) times x_t. b = 0 under the null; under
/// the alternative b is set so that, ignoring estimation error, forecast 2
/// has (1 - reduction) times the MSPE of forecast 1.
ForecastPair simulate_nested_pair(std::size_t n, std::size_t window, Hypothesis h,
                                  double reduction, std::uint64_t seed);

struct ExperimentConfig {
  Hypothesis hypothesis = Hypothesis::Null;
  std::vector<EpaTest> tests{EpaTest::DM, EpaTest::CW, EpaTest::GW};
  std::size_t reps = 2000;
  double alpha = 0.05;
  std::size_t n = 2000;
  std::size_t window = 50;  // nested pair estimation window; CW size settles as n/window grows
  double reduction = 0.3;
  GwInstruments gw_instruments = GwInstruments::Lagged;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct RejectionRate {
  EpaTest test = EpaTest::DM;
  std::size_t rejections = 0;
  std::size_t reps = 0;
  double rate = 0.0;
  double ci_low = 0.0;   // 95% Wilson interval
  double ci_high = 0.0;
};

/// DM and GW are run on exchangeable pairs, CW on nested pairs. Replication r
/// uses derive_seed(seed, r), so results do not depend on the thread count.
std::vector<RejectionRate> size_power_experiment(const ExperimentConfig& cfg);

/// 95% Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n);

}  // namespace volcast
