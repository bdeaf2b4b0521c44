#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "volcast/distributions.hpp"
#include "volcast/epa_tests.hpp"
#include "volcast/error.hpp"

using namespace volcast;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, sd);
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidConfig;
}

// A loss differential whose one-step DM statistic equals `stat`.
std::vector<double> differential_with_stat(double stat, std::size_t n, std::uint64_t seed) {
  auto e = normals(n, seed);
  double m = 0.0;
  for (double v : e) m += v;
  m /= static_cast<double>(n);
  double var = 0.0;
  for (auto& v : e) {
    v -= m;
    var += v * v;
  }
  var /= static_cast<double>(n);
  const double shift = stat * std::sqrt(var / static_cast<double>(n));
  for (auto& v : e) v += shift;
  return e;
}

}  // namespace

TEST_CASE("HAC with no lags is the biased sample variance") {
  const auto x = normals(50, 1, 2.0, 3.0);
  double m = 0.0, s = 0.0;
  for (double v : x) m += v;
  m /= 50.0;
  for (double v : x) s += (v - m) * (v - m);
  CHECK(hac_lrv(x, 0) == doctest::Approx(s / 50.0).epsilon(1e-13));
}

TEST_CASE("HAC matches the double-sum form of the Bartlett estimator") {
  for (std::size_t B : {1u, 3u, 7u}) {
    const auto x = normals(120, 10 + B);
    CHECK(hac_lrv(x, B) == doctest::Approx(oracle::bartlett_lrv(x, B)).epsilon(1e-12));
  }
}

TEST_CASE("HAC on white noise and on an MA(1)") {
  const auto e = normals(100001, 2);
  const std::vector<double> iid(e.begin(), e.end() - 1);
  CHECK(std::abs(hac_lrv(iid, 5) - 1.0) < 0.05);

  const double theta = 0.5;
  std::vector<double> ma(100000);
  for (std::size_t t = 0; t < ma.size(); ++t) ma[t] = e[t + 1] + theta * e[t];
  const double truth = (1 + theta) * (1 + theta);
  CHECK(std::abs(hac_lrv(ma, 20) / truth - 1.0) < 0.05);
}

TEST_CASE("HAC input checks") {
  CHECK(code_of([] { hac_lrv(std::vector<double>(5, 1.0), 0); }) == ErrorCode::DegenerateSeries);
  CHECK(code_of([] { hac_lrv(std::vector<double>{1, 2, 3}, 3); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("DM maps its statistic to a two-sided normal p-value") {
  const auto d = differential_with_stat(1.611, 400, 3);
  const std::vector<double> zero(d.size(), 0.0);
  const auto r = dm_test(d, zero, 1);
  CHECK(r.statistic == doctest::Approx(1.611).epsilon(1e-10));
  CHECK(std::abs(r.p_value - 0.107) <= 0.001);
  CHECK(r.sidedness == Sidedness::TwoSided);
  CHECK(r.n == 400);
  CHECK(r.bandwidth == 0);
  CHECK(dm_test(zero, d, 1).p_value == r.p_value);
}

TEST_CASE("DM is exactly antisymmetric") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = normals(200, 20 + s, 1.0), b = normals(200, 40 + s, 1.1);
    CHECK(dm_test(a, b, 1).statistic == -dm_test(b, a, 1).statistic);
    CHECK(dm_test(a, b, 4).statistic == -dm_test(b, a, 4).statistic);
  }
}

TEST_CASE("DM on identical losses is degenerate") {
  const auto a = normals(50, 4);
  CHECK(code_of([&] { dm_test(a, a, 1); }) == ErrorCode::DegenerateSeries);
}

TEST_CASE("DM bandwidth and small-sample correction") {
  const auto a = normals(300, 5, 1.0), b = normals(300, 6, 0.8);
  std::vector<double> d(300);
  for (std::size_t t = 0; t < 300; ++t) d[t] = a[t] - b[t];
  const auto r = dm_test(a, b, 4);
  CHECK(r.bandwidth == 3);
  double m = 0.0;
  for (double v : d) m += v;
  m /= 300.0;
  CHECK(r.statistic == doctest::Approx(std::sqrt(300.0) * m / std::sqrt(oracle::bartlett_lrv(d, 3))));

  DmOptions o;
  o.small_sample_correction = true;
  const auto c = dm_test(a, b, 4, o);
  const double k = std::sqrt((300.0 + 1 - 8 + 4.0 * 3 / 300.0) / 300.0);
  CHECK(c.statistic == doctest::Approx(k * r.statistic).epsilon(1e-12));
  CHECK(c.p_value == doctest::Approx(2 * dist::student_t_sf(std::abs(c.statistic), 299)));
}

TEST_CASE("too few observations") {
  const auto a = normals(9, 7), b = normals(9, 8);
  CHECK(code_of([&] { dm_test(a, b, 1); }) == ErrorCode::TooFewObservations);
  CHECK(code_of([&] { gw_test(a, GwInstruments::Constant, 1); }) == ErrorCode::TooFewObservations);
}

TEST_CASE("CW maps its statistic to an upper one-sided p-value") {
  for (double stat : {1.898, -4.710}) {
    // With equal forecasts the adjustment vanishes and f = e1^2 - e2^2.
    const auto f = differential_with_stat(stat, 500, 9);
    const auto e2 = normals(500, 10, 10.0);
    std::vector<double> e1(500), same(500, 0.5);
    for (std::size_t t = 0; t < 500; ++t) e1[t] = std::sqrt(e2[t] * e2[t] + f[t]);
    const auto r = cw_test(e1, e2, same, same, 1);
    CHECK(r.statistic == doctest::Approx(stat).epsilon(1e-8));
    CHECK(r.sidedness == Sidedness::UpperOneSided);
    if (stat > 0) CHECK(std::abs(r.p_value - 0.029) <= 0.001);
    else CHECK(std::abs(r.p_value - 1.000) <= 0.0005);
  }
}

TEST_CASE("CW adjusted losses and degenerate input") {
  const std::vector<double> e1{1.0, -2.0}, e2{0.5, 1.0}, f1{3.0, 1.0}, f2{2.5, 4.0};
  const auto f = cw_adjusted_losses(e1, e2, f1, f2);
  CHECK(f[0] == 1.0 - (0.25 - 0.25));
  CHECK(f[1] == 4.0 - (1.0 - 9.0));

  const auto y = normals(40, 11), g = normals(40, 12);
  std::vector<double> e(40);
  for (std::size_t t = 0; t < 40; ++t) e[t] = y[t] - g[t];
  CHECK(code_of([&] { cw_test(e, e, g, g, 1); }) == ErrorCode::DegenerateSeries);
}

TEST_CASE("CW mean is never below the DM mean") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto y = normals(100, 100 + s), f1 = normals(100, 200 + s), f2 = normals(100, 300 + s);
    std::vector<double> e1(100), e2(100), L1(100), L2(100);
    for (std::size_t t = 0; t < 100; ++t) {
      e1[t] = y[t] - f1[t];
      e2[t] = y[t] - f2[t];
      L1[t] = e1[t] * e1[t];
      L2[t] = e2[t] * e2[t];
    }
    CHECK(cw_test(e1, e2, f1, f2, 1).mean >= dm_test(L1, L2, 1).mean);
  }
}

TEST_CASE("statistics do not depend on the loss scale") {
  const auto y = normals(300, 13), f1 = normals(300, 14, 0.0, 0.5), f2 = normals(300, 15, 0.2, 0.4);
  for (double a : {1e-6, 0.37, 1e4}) {
    const double r = std::sqrt(a);
    std::vector<double> e1(300), e2(300), L1(300), L2(300), d(300);
    std::vector<double> e1s(300), e2s(300), f1s(300), f2s(300), L1s(300), L2s(300), ds(300);
    for (std::size_t t = 0; t < 300; ++t) {
      e1[t] = y[t] - f1[t];
      e2[t] = y[t] - f2[t];
      L1[t] = e1[t] * e1[t];
      L2[t] = e2[t] * e2[t];
      d[t] = L1[t] - L2[t];
      e1s[t] = r * e1[t];
      e2s[t] = r * e2[t];
      f1s[t] = r * f1[t];
      f2s[t] = r * f2[t];
      L1s[t] = a * L1[t];
      L2s[t] = a * L2[t];
      ds[t] = a * d[t];
    }
    const auto dm = dm_test(L1, L2, 1), dms = dm_test(L1s, L2s, 1);
    CHECK(dms.statistic == doctest::Approx(dm.statistic).epsilon(1e-9));
    CHECK(dms.p_value == doctest::Approx(dm.p_value).epsilon(1e-9));
    const auto cw = cw_test(e1, e2, f1, f2, 1), cws = cw_test(e1s, e2s, f1s, f2s, 1);
    CHECK(cws.statistic == doctest::Approx(cw.statistic).epsilon(1e-9));
    CHECK(cws.p_value == doctest::Approx(cw.p_value).epsilon(1e-9));
    for (auto instr : {GwInstruments::Constant, GwInstruments::Lagged}) {
      const auto gw = gw_test(d, instr, 1), gws = gw_test(ds, instr, 1);
      CHECK(gws.statistic == doctest::Approx(gw.statistic).epsilon(1e-9));
      CHECK(gws.p_value == doctest::Approx(gw.p_value).epsilon(1e-9));
    }
  }
}

TEST_CASE("GW with a constant instrument reduces to a scalar formula") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = normals(150, 400 + s, 0.1);
    double sum = 0.0, sq = 0.0;
    for (double v : d) {
      sum += v;
      sq += v * v;
    }
    const double n = 150.0, dbar = sum / n;
    const double expected = n * dbar * dbar / (sq / n);
    const auto r = gw_test(d, GwInstruments::Constant, 1);
    CHECK(std::abs(r.statistic - expected) <= 1e-12 * std::max(1.0, expected));
    CHECK(r.q == 1);
    CHECK(r.n == 150);
  }
}

TEST_CASE("GW with lagged instruments uses two moments") {
  const auto d = normals(200, 16, 0.2);
  const auto r = gw_test(d, GwInstruments::Lagged, 1);
  CHECK(r.q == 2);
  CHECK(r.n == 200);
  // Direct evaluation of n Zbar' Omega^-1 Zbar over the 199 usable pairs.
  Eigen::MatrixXd Z(199, 2);
  for (Eigen::Index t = 0; t < 199; ++t) {
    Z(t, 0) = d[static_cast<std::size_t>(t + 1)];
    Z(t, 1) = d[static_cast<std::size_t>(t)] * d[static_cast<std::size_t>(t + 1)];
  }
  const Eigen::Vector2d zbar = Z.colwise().mean();
  const Eigen::Matrix2d omega = Z.transpose() * Z / 199.0;
  const double stat = 199.0 * zbar.dot(omega.inverse() * zbar);
  CHECK(r.statistic == doctest::Approx(stat).epsilon(1e-10));
  CHECK(r.p_value == doctest::Approx(std::exp(-stat / 2)).epsilon(1e-10));
}

TEST_CASE("chi-square tails match a series expansion") {
  for (double q : {1.0, 2.0})
    for (double x : {0.01, 0.5, 1.0, 3.8415, 7.3, 12.0, 25.0})
      CHECK(std::abs(dist::chi2_sf(x, q) - oracle::chi2_sf_series(x, q)) < 1e-10);
  CHECK(std::abs(dist::chi2_sf(3.8415, 1) - 0.05) < 1e-4);
  CHECK(dist::chi2_sf(0.0, 2) == 1.0);
}

TEST_CASE("GW p-value at the 5% critical value") {
  // A constant-instrument series with statistic 3.8415.
  const double target = 3.8415;
  auto d = differential_with_stat(0.0, 300, 17);
  // GW with h_t = 1 is n dbar^2 / mean(d^2); solve for the shift c.
  double sq = 0.0;
  for (double v : d) sq += v * v;
  const double v0 = sq / 300.0;
  const double c = std::sqrt(target * v0 / (300.0 - target));
  for (auto& v : d) v += c;
  const auto r = gw_test(d, GwInstruments::Constant, 1);
  CHECK(r.statistic == doctest::Approx(target).epsilon(1e-10));
  CHECK(std::abs(r.p_value - 0.05) < 1e-4);
}

TEST_CASE("GW refuses expanding-window input and singular instruments") {
  const auto d = normals(60, 18);
  CHECK(code_of([&] { gw_test(d, GwInstruments::Lagged, 1, Scheme::Expanding); }) ==
        ErrorCode::ExpandingSchemeRejected);
  const std::vector<double> ones(60, 1.0);
  CHECK(code_of([&] { gw_test(ones, GwInstruments::Lagged, 1); }) == ErrorCode::SingularOmega);
}

TEST_CASE("results stay in range") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto a = normals(80, 500 + s, 1.0), b = normals(80, 600 + s, 1.0 + 0.02 * s);
    std::vector<double> d(80);
    for (std::size_t t = 0; t < 80; ++t) d[t] = a[t] - b[t];
    for (const auto& r : {dm_test(a, b, 2), gw_test(d, GwInstruments::Lagged, 2),
                          gw_test(d, GwInstruments::Constant, 1)}) {
      CHECK(r.p_value >= 0.0);
      CHECK(r.p_value <= 1.0);
      CHECK(r.n == 80);
      if (r.test == EpaTest::GW) CHECK(r.statistic >= 0.0);
    }
  }
}

TEST_CASE("rejection at alpha = 1 is certain") {
  EpaResult r;
  r.p_value = 1.0;
  CHECK(r.rejects(1.0));
  CHECK_FALSE(r.rejects(0.05));
}

TEST_CASE("GW decision rule") {
  const std::vector<double> up(30, 1.0), down(30, -1.0);
  const auto g = gw_decision_rule(up, GwInstruments::Constant);
  CHECK(g.delta(0) == doctest::Approx(1.0));
  CHECK(g.choice == Choice::Alternative);
  CHECK(gw_decision_rule(down, GwInstruments::Constant).choice == Choice::Benchmark);
  CHECK(gw_decision_rule(up, GwInstruments::Constant, 2.0).choice == Choice::Benchmark);

  // Persistent differential: the lagged rule follows the last observation.
  std::vector<double> ar(300);
  auto e = normals(300, 19, 0.0, 0.3);
  ar[0] = 0.0;
  for (std::size_t t = 1; t < 300; ++t) ar[t] = 0.9 * ar[t - 1] + e[t];
  ar.back() = 5.0;
  const auto lag = gw_decision_rule(ar, GwInstruments::Lagged);
  CHECK(lag.delta.size() == 2);
  CHECK(lag.index == doctest::Approx(lag.delta(0) + 5.0 * lag.delta(1)));
  CHECK(lag.choice == Choice::Alternative);
  CHECK(code_of([] { gw_decision_rule(std::vector<double>{}, GwInstruments::Constant); }) ==
        ErrorCode::EmptySequence);
}

TEST_CASE("test names") {
  CHECK(parse_test("DM") == EpaTest::DM);
  CHECK(parse_test("gw") == EpaTest::GW);
  CHECK(to_string(EpaTest::CW) == "CW");
  CHECK_THROWS_AS(parse_test("spa"), Error);
}
