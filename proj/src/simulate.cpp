#include "volcast/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "volcast/csv.hpp"
#include "volcast/distributions.hpp"
#include "volcast/error.hpp"
#include "volcast/forecast_engine.hpp"
#include "volcast/realized_measures.hpp"

namespace volcast {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::string> business_days(std::size_t count, std::string_view start) {
  using namespace std::chrono;
  const auto iso = csv::normalize_date(start);
  const year_month_day first{year{std::stoi(iso.substr(0, 4))},
                             month{static_cast<unsigned>(std::stoi(iso.substr(5, 2)))},
                             day{static_cast<unsigned>(std::stoi(iso.substr(8, 2)))}};
  sys_days d{first};
  std::vector<std::string> out;
  out.reserve(count);
  char buf[32];
  while (out.size() < count) {
    const weekday wd{d};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{d};
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    d += days{1};
  }
  return out;
}

std::string sim_firm_name(std::size_t index, std::size_t firms) {
  std::size_t width = 2;
  for (std::size_t n = firms; n >= 100; n /= 10) ++width;
  std::ostringstream os;
  os << 'F' << std::setw(static_cast<int>(width)) << std::setfill('0') << (index + 1);
  return os.str();
}

void DgpConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (firms == 0 || days == 0) bad("simulation needs at least one firm and one day");
  if (steps < 2) bad("at least 2 intraday steps are required");
  if (!std::isfinite(drift)) bad("drift must be finite");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) bad("sigma2 must be >= 0");
  if (vol == VolModel::SquareRoot) {
    if (!(kappa_v > 0.0) || !(theta_v > 0.0) || !(xi_v >= 0.0))
      bad("square-root variance needs kappa_v > 0, theta_v > 0, xi_v >= 0");
    if (!(rho >= -1.0 && rho <= 1.0)) bad("rho must lie in [-1,1]");
  }
  if (!(jump_intensity >= 0.0) || !(jump_sd >= 0.0)) bad("jump parameters must be >= 0");
}

DgpConfig dgp_preset(std::string_view name) {
  DgpConfig c;
  if (name == "constant") {
    c.vol = VolModel::Constant;
  } else if (name == "sv") {
    c.vol = VolModel::SquareRoot;
  } else if (name == "sv-jumps") {
    c.vol = VolModel::SquareRoot;
    c.jump_intensity = 0.2;
    c.jump_sd = 1.0;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown preset '" + std::string(name) +
                                              "' (constant, sv, sv-jumps)");
  }
  return c;
}

SimulatedPaths simulate_paths(const DgpConfig& cfg) {
  cfg.validate();
  SimulatedPaths sim;
  auto& ip = sim.intraday;
  for (std::size_t f = 0; f < cfg.firms; ++f) ip.firms.push_back(sim_firm_name(f, cfg.firms));
  ip.days = business_days(cfg.days);
  ip.returns.assign(cfg.firms, std::vector<Series>(cfg.days, Series(cfg.steps)));
  sim.truth.assign(cfg.firms, std::vector<DayTruth>(cfg.days));

  const double dt = 1.0 / static_cast<double>(cfg.steps);
  const double sdt = std::sqrt(dt);
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - cfg.rho * cfg.rho));
  for (std::size_t f = 0; f < cfg.firms; ++f) {
    std::mt19937_64 rng(derive_seed(cfg.seed, f));
    std::normal_distribution<double> z;
    std::poisson_distribution<int> jumps_in_step(cfg.jump_intensity * dt);
    double v = cfg.sigma2;
    for (std::size_t d = 0; d < cfg.days; ++d) {
      auto& out = ip.returns[f][d];
      auto& truth = sim.truth[f][d];
      for (std::size_t k = 0; k < cfg.steps; ++k) {
        const double vp = std::max(v, 0.0);
        const double z1 = z(rng);
        double r = cfg.drift * dt + std::sqrt(vp) * sdt * z1;
        truth.iv += vp * dt;
        if (cfg.vol == VolModel::SquareRoot) {
          const double z2 = cfg.rho * z1 + rho_c * z(rng);
          v += cfg.kappa_v * (cfg.theta_v - vp) * dt + cfg.xi_v * std::sqrt(vp) * sdt * z2;
        }
        if (cfg.jump_intensity > 0.0) {
          const int count = jumps_in_step(rng);
          for (int j = 0; j < count; ++j) {
            const double size = cfg.jump_sd * z(rng);
            r += size;
            truth.jv += size * size;
          }
          truth.jumps += static_cast<std::size_t>(count);
        }
        out[k] = r;
      }
    }
  }
  return sim;
}

std::string format_truth(const SimulatedPaths& sim) {
  std::ostringstream os;
  os << "date,firm,iv,jv,jumps\n";
  const auto& ip = sim.intraday;
  for (std::size_t d = 0; d < ip.day_count(); ++d)
    for (std::size_t f = 0; f < ip.firm_count(); ++f) {
      const auto& t = sim.truth[f][d];
      os << ip.days[d] << ',' << ip.firms[f] << ',' << csv::format_double(t.iv) << ','
         << csv::format_double(t.jv) << ',' << t.jumps << '\n';
    }
  return os.str();
}

void HarPanelConfig::validate() const {
  const auto n = intercepts.size();
  if (n == 0) throw Error(ErrorCode::InvalidConfig, "HAR panel needs at least one firm");
  if (phi.rows() != n || phi.cols() != 3 * n)
    throw Error(ErrorCode::InvalidConfig, "Phi must be N x 3N");
  if (days < kMonthlyWindow + 2)
    throw Error(ErrorCode::InvalidConfig, "HAR panel needs at least 24 days");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd) || !phi.allFinite() || !intercepts.allFinite())
    throw Error(ErrorCode::InvalidConfig, "HAR panel parameters must be finite");
}

Eigen::MatrixXd benchmark_phi(std::size_t firms, double beta_d, double beta_w, double beta_m) {
  const auto n = static_cast<Eigen::Index>(firms);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, 3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phi(i, 3 * i) = beta_d;
    phi(i, 3 * i + 1) = beta_w;
    phi(i, 3 * i + 2) = beta_m;
  }
  return phi;
}

namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

HarPanel simulate_har_panel(const HarPanelConfig& cfg) {
  cfg.validate();
  const std::size_t N = cfg.firms();
  const std::size_t total = cfg.burn_in + cfg.days;
  const double a = std::sqrt(3.0) * cfg.noise_sd;
  std::mt19937_64 rng(derive_seed(cfg.seed, 0));
  std::uniform_real_distribution<double> u(-a, a);

  std::vector<Series> rv(N, Series(total));
  Eigen::VectorXd lags(static_cast<Eigen::Index>(3 * N));
  for (std::size_t i = 0; i < N; ++i) rv[i][0] = cfg.intercepts(static_cast<Eigen::Index>(i));

  auto window_mean = [&](std::size_t i, std::size_t t, std::size_t w) {
    const std::size_t first = t + 1 >= w ? t + 1 - w : 0;
    double s = 0.0;
    for (std::size_t k = first; k <= t; ++k) s += rv[i][k];
    return s / static_cast<double>(t + 1 - first);
  };

  for (std::size_t t = 0; t + 1 < total; ++t) {
    for (std::size_t j = 0; j < N; ++j) {
      const auto b = static_cast<Eigen::Index>(3 * j);
      lags(b) = rv[j][t];
      lags(b + 1) = window_mean(j, t, kWeeklyWindow);
      lags(b + 2) = window_mean(j, t, kMonthlyWindow);
    }
    const Eigen::VectorXd next = cfg.intercepts + cfg.phi * lags;
    for (std::size_t i = 0; i < N; ++i) {
      const double value = next(static_cast<Eigen::Index>(i)) + u(rng);
      if (!std::isfinite(value))
        throw Error(ErrorCode::ExplosiveDynamics, "RV of " + sim_firm_name(i, N) + " overflowed");
      if (value < 0.0)
        throw Error(ErrorCode::InvalidConfig,
                    "simulated RV of " + sim_firm_name(i, N) +
                        " turned negative; raise the intercepts or lower the noise");
      rv[i][t + 1] = value;
    }
    if ((t + 2) % 50 == 0 || t + 2 == total) {
      for (std::size_t i = 0; i < N; ++i) {
        const Series seen(rv[i].begin(), rv[i].begin() + static_cast<std::ptrdiff_t>(t + 2));
        const double med = median_of(seen);
        if (rv[i][t + 1] > 1e6 * med)
          throw Error(ErrorCode::ExplosiveDynamics,
                      "RV of " + sim_firm_name(i, N) + " exceeds 1e6 times its median");
      }
    }
  }

  std::vector<std::string> firms;
  for (std::size_t i = 0; i < N; ++i) firms.push_back(sim_firm_name(i, N));
  std::vector<Series> kept(N);
  for (std::size_t i = 0; i < N; ++i)
    kept[i].assign(rv[i].begin() + static_cast<std::ptrdiff_t>(cfg.burn_in), rv[i].end());
  HarPanel out;
  out.panel = make_rv_panel(std::move(firms), business_days(cfg.days), std::move(kept));
  out.intercepts = cfg.intercepts;
  out.phi = cfg.phi;
  return out;
}

SparseRegression simulate_sparse_regression(std::size_t rows, const Eigen::VectorXd& beta,
                                            double noise_sd, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::normal_distribution<double> z;
  SparseRegression s;
  s.beta = beta;
  const auto T = static_cast<Eigen::Index>(rows);
  s.X.resize(T, beta.size());
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index j = 0; j < beta.size(); ++j) s.X(t, j) = z(rng);
  s.y = s.X * beta;
  for (Eigen::Index t = 0; t < T; ++t) s.y(t) += noise_sd * z(rng);
  return s;
}

ForecastPair simulate_exchangeable_pair(std::size_t n, Hypothesis h, double reduction,
                                        std::uint64_t seed) {
  if (!(reduction > 0.0 && reduction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "MSPE reduction must lie in (0,1)");
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::normal_distribution<double> z;
  // Shared error component with variance 1 - reduction plus idiosyncratic
  // parts with variance `reduction`; the alternative drops the second one's.
  const double common = std::sqrt(1.0 - reduction);
  const double idio = std::sqrt(reduction);
  ForecastPair p;
  for (std::size_t t = 0; t < n; ++t) {
    const double signal = z(rng);
    const double eta = common * z(rng);
    const double v1 = idio * z(rng);
    const double v2 = idio * z(rng);
    const double y = signal + eta;
    p.y.push_back(y);
    p.f1.push_back(signal - v1);
    p.f2.push_back(h == Hypothesis::Null ? signal - v2 : signal);
    p.e1.push_back(y - p.f1.back());
    p.e2.push_back(y - p.f2.back());
  }
  return p;
}

ForecastPair simulate_nested_pair(std::size_t n, std::size_t window, Hypothesis h,
                                  double reduction, std::uint64_t seed) {
  if (window < 2) throw Error(ErrorCode::InvalidConfig, "estimation window must be >= 2");
  if (!(reduction > 0.0 && reduction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "MSPE reduction must lie in (0,1)");
  const double b = h == Hypothesis::Null ? 0.0 : std::sqrt(reduction / (1.0 - reduction));
  std::mt19937_64 rng(derive_seed(seed, 2));
  std::normal_distribution<double> z;
  const std::size_t total = window + n + 1;
  std::vector<double> x(total), y(total, 0.0);
  for (std::size_t t = 0; t < total; ++t) x[t] = z(rng);
  for (std::size_t t = 1; t < total; ++t) y[t] = b * x[t - 1] + z(rng);

  ForecastPair p;
  // Running sums over pairs (x_{s-1}, y_s) for s in the window ending at the origin.
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t s = 1; s <= window; ++s) {
    sxy += x[s - 1] * y[s];
    sxx += x[s - 1] * x[s - 1];
  }
  for (std::size_t t = window; t < window + n; ++t) {
    const double slope = sxy / sxx;
    const double f2 = slope * x[t];
    const double actual = y[t + 1];
    p.y.push_back(actual);
    p.f1.push_back(0.0);
    p.f2.push_back(f2);
    p.e1.push_back(actual);
    p.e2.push_back(actual - f2);
    const std::size_t drop = t + 1 - window;
    sxy += x[t] * y[t + 1] - x[drop - 1] * y[drop];
    sxx += x[t] * x[t] - x[drop - 1] * x[drop - 1];
  }
  return p;
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(k) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (ph + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<RejectionRate> size_power_experiment(const ExperimentConfig& cfg) {
  if (cfg.reps < 200) throw Error(ErrorCode::InvalidConfig, "size/power experiments need >= 200 reps");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0,1]");
  if (cfg.tests.empty()) throw Error(ErrorCode::InvalidConfig, "no tests requested");
  const std::size_t K = cfg.tests.size();
  std::vector<unsigned char> reject(cfg.reps * K, 0);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(cfg.seed, r);
    std::optional<ForecastPair> flat, nested;
    for (std::size_t k = 0; k < K; ++k) {
      EpaResult res;
      if (cfg.tests[k] == EpaTest::CW) {
        if (!nested) nested = simulate_nested_pair(cfg.n, cfg.window, cfg.hypothesis, cfg.reduction, s);
        res = cw_test(nested->e1, nested->e2, nested->f1, nested->f2, 1);
      } else {
        if (!flat) flat = simulate_exchangeable_pair(cfg.n, cfg.hypothesis, cfg.reduction, s);
        std::vector<double> L1(cfg.n), L2(cfg.n), d(cfg.n);
        for (std::size_t t = 0; t < cfg.n; ++t) {
          L1[t] = flat->e1[t] * flat->e1[t];
          L2[t] = flat->e2[t] * flat->e2[t];
          d[t] = L1[t] - L2[t];
        }
        res = cfg.tests[k] == EpaTest::DM ? dm_test(L1, L2, 1) : gw_test(d, cfg.gw_instruments, 1);
      }
      reject[r * K + k] = res.rejects(cfg.alpha) ? 1 : 0;
    }
  });
  std::vector<RejectionRate> out;
  for (std::size_t k = 0; k < K; ++k) {
    RejectionRate rr;
    rr.test = cfg.tests[k];
    rr.reps = cfg.reps;
    for (std::size_t r = 0; r < cfg.reps; ++r) rr.rejections += reject[r * K + k];
    rr.rate = static_cast<double>(rr.rejections) / static_cast<double>(cfg.reps);
    std::tie(rr.ci_low, rr.ci_high) = wilson_interval(rr.rejections, cfg.reps);
    out.push_back(rr);
  }
  return out;
}

}  // namespace volcast
