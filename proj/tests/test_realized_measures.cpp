#include "doctest.h"

#include <random>

#include "volcast/error.hpp"
#include "volcast/realized_measures.hpp"
#include "volcast/simulate.hpp"

using namespace volcast;

namespace {

std::vector<double> random_returns(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 0.01);
  std::vector<double> r(m);
  for (auto& v : r) v = z(rng);
  return r;
}

SimulatedPaths constant_vol_days(std::size_t days, std::size_t m, std::uint64_t seed) {
  DgpConfig cfg;
  cfg.vol = VolModel::Constant;
  cfg.sigma2 = 0.04;
  cfg.days = days;
  cfg.steps = m;
  cfg.seed = seed;
  return simulate_paths(cfg);
}

}  // namespace

TEST_CASE("RV is the sum of squares") {
  const std::vector<double> r{0.01, -0.02, 0.01};
  CHECK(compute_rv(r) == doctest::Approx(0.0006).epsilon(1e-12));
  CHECK(compute_rv(std::vector<double>(10, 0.0)) == 0.0);
  CHECK_THROWS_AS(compute_rv(std::vector<double>{}), Error);
}

TEST_CASE("BPV of constant absolute returns has a closed form") {
  const double c = 0.003;
  const std::size_t m = 50;
  std::vector<double> r(m);
  for (std::size_t i = 0; i < m; ++i) r[i] = i % 3 == 0 ? -c : c;
  const double expected = (m - 1) * c * c / (kMu1 * kMu1);
  CHECK(compute_bpv(r) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(compute_bpv(std::vector<double>(5, 0.0)) == 0.0);
  CHECK_THROWS_AS(compute_bpv(std::vector<double>{0.1}), Error);
}

TEST_CASE("RQ example") {
  CHECK(compute_rq(std::vector<double>{0.1, 0.1, 0.1}) == doctest::Approx(3e-4).epsilon(1e-12));
  CHECK(compute_rq(std::vector<double>(4, 0.0)) == 0.0);
}

TEST_CASE("jump truncation") {
  CHECK(compute_jump(2.0, 1.5) == 0.5);
  CHECK(compute_jump(1.0, 2.0) == 0.0);
  CHECK(compute_jump(0.0, 0.0) == 0.0);
}

TEST_CASE("measures scale with the returns") {
  const auto r = random_returns(78, 1);
  const double a = 3.7;
  std::vector<double> ar(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) ar[i] = a * r[i];
  const auto m = compute_measures(r);
  const auto ma = compute_measures(ar);
  CHECK(ma.rv == doctest::Approx(a * a * m.rv).epsilon(1e-12));
  CHECK(ma.bpv == doctest::Approx(a * a * m.bpv).epsilon(1e-12));
  CHECK(ma.jump == doctest::Approx(a * a * m.jump).epsilon(1e-9).scale(m.rv));
  CHECK(ma.rq == doctest::Approx(a * a * a * a * m.rq).epsilon(1e-12));
}

TEST_CASE("jump is never negative and vanishes when bpv >= rv") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto m = compute_measures(random_returns(39, 100 + s));
    CHECK(m.jump >= 0.0);
    CHECK(m.jump == std::max(m.rv - m.bpv, 0.0));
    if (m.bpv >= m.rv) CHECK(m.jump == 0.0);
  }
}

TEST_CASE("trailing and forward averages") {
  const std::vector<double> s{1, 2, 3, 4, 5};
  const auto t5 = temporal_average(s, 5, AverageMode::Trailing);
  CHECK(t5[4] == doctest::Approx(3.0));
  for (int i = 0; i < 4; ++i) CHECK(is_missing(t5[static_cast<std::size_t>(i)]));

  const auto f1 = temporal_average(s, 1, AverageMode::Forward);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) CHECK(f1[i] == s[i + 1]);
  CHECK(is_missing(f1.back()));

  const auto f2 = temporal_average(s, 2, AverageMode::Forward);
  CHECK(f2[0] == doctest::Approx(2.5));
  CHECK(is_missing(f2[3]));
}

TEST_CASE("averages of a constant series are constant") {
  const std::vector<double> c(30, 1.75);
  for (std::size_t w : {1u, 5u, 22u})
    for (auto mode : {AverageMode::Trailing, AverageMode::Forward})
      for (double v : temporal_average(c, w, mode))
        if (!is_missing(v)) CHECK(v == doctest::Approx(1.75));
}

TEST_CASE("averages are linear in the series") {
  const auto a = random_returns(60, 7), b = random_returns(60, 8);
  std::vector<double> comb(60);
  for (std::size_t i = 0; i < 60; ++i) comb[i] = 2.0 * a[i] - 0.5 * b[i];
  for (auto mode : {AverageMode::Trailing, AverageMode::Forward}) {
    const auto ta = temporal_average(a, 22, mode);
    const auto tb = temporal_average(b, 22, mode);
    const auto tc = temporal_average(comb, 22, mode);
    for (std::size_t i = 0; i < 60; ++i) {
      if (is_missing(tc[i])) {
        CHECK(is_missing(ta[i]));
        continue;
      }
      CHECK(tc[i] == doctest::Approx(2.0 * ta[i] - 0.5 * tb[i]).scale(1e-3));
    }
  }
}

TEST_CASE("missing values poison the windows that contain them") {
  std::vector<double> s(10, 1.0);
  s[4] = kMissing;
  const auto t = temporal_average(s, 3, AverageMode::Trailing);
  CHECK(is_missing(t[4]));
  CHECK(is_missing(t[6]));
  CHECK(t[7] == 1.0);
}

TEST_CASE("bad windows are rejected") {
  const std::vector<double> s{1, 2, 3};
  CHECK_THROWS_AS(temporal_average(s, 0, AverageMode::Trailing), Error);
  try {
    temporal_average(s, 4, AverageMode::Trailing);
    FAIL("expected WindowExceedsSeries");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WindowExceedsSeries);
  }
}

TEST_CASE("constant-volatility paths: RV, BPV and RQ around their targets") {
  const auto sim = constant_vol_days(500, 4680, 21);
  double rv = 0, bpv = 0, rq = 0;
  for (const auto& day : sim.intraday.returns[0]) {
    rv += compute_rv(day);
    bpv += compute_bpv(day);
    rq += compute_rq(day);
  }
  rv /= 500;
  bpv /= 500;
  rq /= 500;
  CHECK(std::abs(rv - 0.04) < 0.002);
  CHECK(std::abs(bpv - 0.04) < 0.003);
  // Integrated quarticity of a constant-variance diffusion over one day is sigma^4.
  CHECK(std::abs(rq - 0.0016) < 0.15 * 0.0016);
}

TEST_CASE("an injected jump moves RV but not BPV") {
  const auto sim = constant_vol_days(200, 4680, 22);
  double bpv = 0, rv = 0;
  for (auto day : sim.intraday.returns[0]) {
    day[2000] += 0.5;
    bpv += compute_bpv(day);
    rv += compute_rv(day);
  }
  bpv /= 200;
  rv /= 200;
  CHECK(std::abs(bpv - 0.04) < 0.005);
  CHECK(std::abs(rv - 0.29) < 0.005);
}

TEST_CASE("panel build matches per-day measures") {
  auto sim = constant_vol_days(30, 39, 23);
  const auto panel = build_realized_panel(sim.intraday);
  REQUIRE(panel.has_intraday_measures);
  for (std::size_t d = 0; d < 30; ++d) {
    const auto m = compute_measures(sim.intraday.returns[0][d]);
    CHECK(panel.rv[0][d] == m.rv);
    CHECK(panel.bpv[0][d] == m.bpv);
    CHECK(panel.rq[0][d] == m.rq);
    CHECK(panel.jump[0][d] == m.jump);
  }
  validate(panel);
}
