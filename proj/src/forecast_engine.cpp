#include "volcast/forecast_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "volcast/csv.hpp"
#include "volcast/error.hpp"

namespace volcast {

namespace {

std::string lower(std::string_view text) {
  std::string s;
  for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(Scheme s) noexcept {
  return s == Scheme::Rolling ? "rolling" : "expanding";
}

std::string_view to_string(Loss l) noexcept { return l == Loss::Squared ? "squared" : "absolute"; }

Scheme parse_scheme(std::string_view text) {
  const auto s = lower(text);
  if (s == "rolling") return Scheme::Rolling;
  if (s == "expanding" || s == "recursive") return Scheme::Expanding;
  throw Error(ErrorCode::InvalidConfig, "unknown scheme '" + std::string(text) + "'");
}

Loss parse_loss(std::string_view text) {
  const auto s = lower(text);
  if (s == "squared" || s == "se" || s == "mse") return Loss::Squared;
  if (s == "absolute" || s == "ae" || s == "mae") return Loss::Absolute;
  throw Error(ErrorCode::InvalidConfig, "unknown loss '" + std::string(text) + "'");
}

ModelConfig parse_model(std::string_view text) {
  const auto parts = split_on(text, ':');
  if (parts.size() > 3 || parts[0].empty())
    throw Error(ErrorCode::InvalidConfig, "model spec '" + std::string(text) +
                                              "' is not variant[:penalty[:scope]]");
  ModelConfig m;
  m.spec.variant = parse_variant(parts[0]);
  m.penalty = parts.size() > 1 ? parse_penalty(parts[1]) : PenaltyKind::None;
  if (parts.size() > 2) {
    m.spec.scope = parse_scope(parts[2]);
  } else {
    m.spec.scope = m.penalty == PenaltyKind::None ? Scope::Benchmark : Scope::CrossSection;
  }
  return m;
}

std::string model_label(const ModelConfig& m) {
  std::string s = lower(to_string(m.spec.variant));
  s += ":";
  s += to_string(m.penalty);
  s += ":";
  s += to_string(m.spec.scope);
  return s;
}

double FittedModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double out = intercept;
  for (std::size_t k = 0; k < standardization.kept.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double z = (x(static_cast<Eigen::Index>(standardization.kept[k])) -
                      standardization.centers(kk)) /
                     standardization.scales(kk);
    out += z * beta(kk);
  }
  return out;
}

LinearCoefficients FittedModel::original_scale() const {
  return destandardize(standardization, intercept, beta);
}

std::vector<std::size_t> FittedModel::active_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < standardization.kept.size(); ++k)
    if (beta(static_cast<Eigen::Index>(k)) != 0.0) out.push_back(standardization.kept[k]);
  return out;
}

FittedModel fit_model(const Eigen::Ref<const Eigen::MatrixXd>& X,
                      const Eigen::Ref<const Eigen::VectorXd>& y, const ModelConfig& model,
                      std::optional<double> reuse_lambda, std::uint64_t seed) {
  FittedModel fm;
  fm.standardization = standardize(X, ZeroVariancePolicy::Drop);
  const auto& Xs = fm.standardization.X;
  if (Xs.cols() == 0) {
    fm.intercept = y.mean();
    fm.beta = Eigen::VectorXd(0);
    return fm;
  }
  if (model.penalty == PenaltyKind::None) {
    const auto ols = fit_ols(Xs, y);
    fm.intercept = ols.intercept;
    fm.beta = ols.coefficients;
    return fm;
  }

  PenaltySpec spec;
  spec.kind = model.penalty;
  spec.eta = model.eta;
  spec.gamma = model.gamma;
  if (model.lambda) {
    fm.lambda = *model.lambda;
  } else if (reuse_lambda) {
    fm.lambda = *reuse_lambda;
  } else {
    const auto grid = lambda_grid(Xs, y, spec, model.grid_size, model.grid_ratio);
    CvOptions opt;
    opt.folds = model.cv_folds;
    opt.scheme = model.fold_scheme;
    opt.rule = model.cv_rule;
    opt.seed = seed;
    opt.solver = model.solver;
    fm.cv = cross_validate(Xs, y, spec, grid, opt);
    fm.lambda = fm.cv->lambda;
  }
  spec.lambda = fm.lambda;
  const auto fit = fit_penalized(Xs, y, spec, model.solver);
  fm.intercept = fit.intercept;
  fm.beta = fit.coefficients;
  return fm;
}

double loss_value(double error, Loss loss) noexcept {
  return loss == Loss::Squared ? error * error : std::abs(error);
}

double mspe(std::span<const double> errors) {
  if (errors.empty()) throw Error(ErrorCode::EmptySequence, "no forecast errors");
  double s = 0.0;
  for (double e : errors) s += e * e;
  return s / static_cast<double>(errors.size());
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  threads = std::clamp<std::size_t>(threads, 1, n);
  std::vector<std::exception_ptr> errors(n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    auto worker = [&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
          failed.store(true);
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

struct Aligned {
  std::vector<std::size_t> days;  // predictor day of each common row
  Eigen::MatrixXd X1, X2;
  Eigen::VectorXd y;
};

Aligned align(const DesignMatrix& a, const DesignMatrix& b) {
  Aligned out;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  std::size_t i = 0, j = 0;
  while (i < a.rows.size() && j < b.rows.size()) {
    if (a.rows[i] < b.rows[j]) {
      ++i;
    } else if (b.rows[j] < a.rows[i]) {
      ++j;
    } else {
      pairs.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out.days.push_back(a.rows[i]);
      ++i;
      ++j;
    }
  }
  const auto n = static_cast<Eigen::Index>(pairs.size());
  out.X1.resize(n, a.X.cols());
  out.X2.resize(n, b.X.cols());
  out.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    out.X1.row(r) = a.X.row(pairs[static_cast<std::size_t>(r)].first);
    out.X2.row(r) = b.X.row(pairs[static_cast<std::size_t>(r)].second);
    out.y(r) = a.y(pairs[static_cast<std::size_t>(r)].first);
  }
  return out;
}

}  // namespace

ForecastRun run_scheme(const RealizedPanel& panel, std::size_t firm, const ModelConfig& bench,
                       const ModelConfig& model, const SchemeConfig& cfg, std::uint64_t seed) {
  if (cfg.window == 0) throw Error(ErrorCode::InvalidConfig, "window must be >= 1");
  if (cfg.horizon == 0) throw Error(ErrorCode::InvalidConfig, "horizon must be >= 1");
  if (cfg.cv_refresh == 0) throw Error(ErrorCode::InvalidConfig, "cv refresh stride must be >= 1");
  if (firm >= panel.firm_count()) throw Error(ErrorCode::InvalidConfig, "firm index out of range");
  const std::string& name = panel.firms[firm];

  ModelSpec s1 = bench.spec, s2 = model.spec;
  s1.horizon = s2.horizon = cfg.horizon;
  const auto data = [&] {
    try {
      return align(build_design(panel, firm, s1), build_design(panel, firm, s2));
    } catch (const Error& e) {
      rethrow_with_context(e, "firm " + name);
    }
  }();

  // Training rows for the origin at common row i are those whose target ends
  // on or before the origin day: the prefix [0, avail[i]).
  const std::size_t U = data.days.size();
  const std::size_t P = cfg.window;
  std::vector<std::size_t> origin_rows, avail;
  std::size_t m = 0;
  for (std::size_t i = 0; i < U; ++i) {
    while (m < U && data.days[m] + cfg.horizon <= data.days[i]) ++m;
    if (m >= P) {
      origin_rows.push_back(i);
      avail.push_back(m);
    }
  }
  const std::size_t n = origin_rows.size();
  if (n == 0)
    throw Error(ErrorCode::InsufficientWindow,
                "firm " + name + ": " + std::to_string(U) + " usable rows leave no origin with " +
                    std::to_string(P) + " training rows at horizon " + std::to_string(cfg.horizon));

  ForecastRun run;
  run.firm = name;
  run.bench_label = model_label(bench);
  run.model_label = model_label(model);
  run.config = cfg;
  run.dates.resize(n);
  run.origins.resize(n);
  run.train_end.resize(n);
  for (auto* v : {&run.actual, &run.f1, &run.f2, &run.e1, &run.e2, &run.L1, &run.L2, &run.d,
                  &run.lambda1, &run.lambda2})
    v->assign(n, 0.0);

  auto one = [&](std::size_t w, std::optional<double>& lam1, std::optional<double>& lam2) {
    const std::size_t i = origin_rows[w];
    const std::size_t end = avail[w];
    const std::size_t begin = cfg.scheme == Scheme::Rolling ? end - P : 0;
    const auto len = static_cast<Eigen::Index>(end - begin);
    const auto b = static_cast<Eigen::Index>(begin);
    const std::size_t origin_day = data.days[i];
    const std::size_t consumed = data.days[end - 1] + cfg.horizon;
    if (consumed > origin_day) throw std::logic_error("training target overlaps the forecast origin");
    try {
      const auto fm1 = fit_model(data.X1.middleRows(b, len), data.y.segment(b, len), bench, lam1,
                                 seed + w);
      const auto fm2 = fit_model(data.X2.middleRows(b, len), data.y.segment(b, len), model, lam2,
                                 seed + w);
      if (bench.penalty != PenaltyKind::None) lam1 = fm1.lambda;
      if (model.penalty != PenaltyKind::None) lam2 = fm2.lambda;
      const auto r = static_cast<Eigen::Index>(i);
      double p1 = fm1.predict(data.X1.row(r));
      double p2 = fm2.predict(data.X2.row(r));
      if (cfg.floor_zero) {
        p1 = std::max(p1, 0.0);
        p2 = std::max(p2, 0.0);
      }
      const double y = data.y(r);
      run.origins[w] = origin_day;
      run.train_end[w] = consumed;
      run.dates[w] = panel.days[origin_day + cfg.horizon];
      run.actual[w] = y;
      run.f1[w] = p1;
      run.f2[w] = p2;
      run.e1[w] = y - p1;
      run.e2[w] = y - p2;
      run.L1[w] = loss_value(run.e1[w], cfg.loss);
      run.L2[w] = loss_value(run.e2[w], cfg.loss);
      run.d[w] = run.L1[w] - run.L2[w];
      run.lambda1[w] = bench.penalty == PenaltyKind::None ? kMissing : fm1.lambda;
      run.lambda2[w] = model.penalty == PenaltyKind::None ? kMissing : fm2.lambda;
    } catch (const Error& e) {
      rethrow_with_context(e, "firm " + name + " origin " + panel.days[origin_day]);
    }
  };

  const std::size_t stride = cfg.cv_refresh;
  const std::size_t blocks = (n + stride - 1) / stride;
  parallel_for(blocks, cfg.threads, [&](std::size_t blk) {
    std::optional<double> lam1, lam2;
    const std::size_t last = std::min(n, (blk + 1) * stride);
    for (std::size_t w = blk * stride; w < last; ++w) one(w, lam1, lam2);
  });
  return run;
}

namespace {

constexpr std::string_view kRunColumns =
    "date,actual,f1,f2,e1,e2,L1,L2,d,origin,train_end,lambda1,lambda2";

}  // namespace

std::string format_run(const ForecastRun& run) {
  std::ostringstream os;
  const auto& c = run.config;
  os << "# firm=" << run.firm << " bench=" << run.bench_label << " model=" << run.model_label
     << " scheme=" << to_string(c.scheme) << " window=" << c.window << " h=" << c.horizon
     << " loss=" << to_string(c.loss) << " cv_refresh=" << c.cv_refresh
     << " floor_zero=" << (c.floor_zero ? 1 : 0) << "\n";
  os << kRunColumns << "\n";
  using csv::format_double;
  for (std::size_t t = 0; t < run.size(); ++t) {
    os << run.dates[t] << ',' << format_double(run.actual[t]) << ',' << format_double(run.f1[t])
       << ',' << format_double(run.f2[t]) << ',' << format_double(run.e1[t]) << ','
       << format_double(run.e2[t]) << ',' << format_double(run.L1[t]) << ','
       << format_double(run.L2[t]) << ',' << format_double(run.d[t]) << ',' << run.origins[t]
       << ',' << run.train_end[t] << ',' << format_double(run.lambda1[t]) << ','
       << format_double(run.lambda2[t]) << "\n";
  }
  return os.str();
}

ForecastRun parse_run(std::string_view text) {
  std::vector<std::string> lines;
  for (auto& l : split_on(text, '\n')) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (!l.empty()) lines.push_back(std::move(l));
  }
  if (lines.size() < 2 || lines[0].rfind("# ", 0) != 0)
    throw Error(ErrorCode::ParseError, "forecast run lacks its '# key=value' header");
  std::map<std::string, std::string> meta;
  for (const auto& tok : split_on(std::string_view(lines[0]).substr(2), ' ')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    meta[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end())
      throw Error(ErrorCode::MissingColumn, std::string("forecast run header lacks '") + key + "'");
    return it->second;
  };
  ForecastRun run;
  run.firm = need("firm");
  run.bench_label = need("bench");
  run.model_label = need("model");
  run.config.scheme = parse_scheme(need("scheme"));
  run.config.window = static_cast<std::size_t>(csv::parse_int(need("window"), "window"));
  run.config.horizon = static_cast<std::size_t>(csv::parse_int(need("h"), "h"));
  run.config.loss = parse_loss(need("loss"));
  if (meta.count("cv_refresh"))
    run.config.cv_refresh = static_cast<std::size_t>(csv::parse_int(meta["cv_refresh"], "cv_refresh"));
  if (meta.count("floor_zero")) run.config.floor_zero = meta["floor_zero"] == "1";

  if (lines[1] != kRunColumns)
    throw Error(ErrorCode::MissingColumn, "unexpected forecast run columns '" + lines[1] + "'");
  for (std::size_t k = 2; k < lines.size(); ++k) {
    const auto f = csv::split(lines[k]);
    if (f.size() != 13)
      throw Error(ErrorCode::ParseError, "forecast run line " + std::to_string(k + 1) +
                                             " has " + std::to_string(f.size()) + " fields");
    run.dates.push_back(f[0]);
    run.actual.push_back(csv::parse_double(f[1], "actual"));
    run.f1.push_back(csv::parse_double(f[2], "f1"));
    run.f2.push_back(csv::parse_double(f[3], "f2"));
    run.e1.push_back(csv::parse_double(f[4], "e1"));
    run.e2.push_back(csv::parse_double(f[5], "e2"));
    run.L1.push_back(csv::parse_double(f[6], "L1"));
    run.L2.push_back(csv::parse_double(f[7], "L2"));
    run.d.push_back(csv::parse_double(f[8], "d"));
    run.origins.push_back(static_cast<std::size_t>(csv::parse_int(f[9], "origin")));
    run.train_end.push_back(static_cast<std::size_t>(csv::parse_int(f[10], "train_end")));
    run.lambda1.push_back(csv::parse_double(f[11], "lambda1"));
    run.lambda2.push_back(csv::parse_double(f[12], "lambda2"));
  }
  return run;
}

void write_run(const std::filesystem::path& path, const ForecastRun& run) {
  csv::write_file(path, format_run(run));
}

ForecastRun read_run(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : csv::read_lines(path)) text += l + "\n";
  try {
    return parse_run(text);
  } catch (const Error& e) {
    rethrow_with_context(e, path.string());
  }
}

}  // namespace volcast
