#include "volcast/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "volcast/csv.hpp"
#include "volcast/error.hpp"
#include "volcast/forecast_engine.hpp"
#include "volcast/realized_measures.hpp"
#include "volcast/report.hpp"
#include "volcast/simulate.hpp"

namespace fs = std::filesystem;

namespace volcast {

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
  std::string config;
};

struct FitOptions {
  std::size_t cv = 5;
  std::size_t grid = 100;
  double grid_ratio = 1e-4;
  double eta = 0.5;
  double gamma = 1.0;
  std::string lambda;
  std::string folds = "contiguous";
  std::string cv_rule = "min";
  std::size_t horizon = 1;
};

struct SchemeOptions {
  std::string bench = "har:ols";
  std::string models = "har:lasso";
  std::string scheme = "rolling";
  std::size_t window = 252;
  std::string loss = "squared";
  std::string firms = "all";
  std::size_t cv_refresh = 1;
  bool floor_zero = false;
};

struct TestOptions {
  std::string tests = "dm,cw,gw";
  double alpha = 0.05;
  std::string gw_instruments = "lagged";
  std::string formats = "text,csv,json";
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--threads", c.threads, "worker threads")
      ->envname("VOLCAST_THREADS")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output directory")->required();
  sub->add_option("--config", c.config, "key=value file; command-line flags take precedence");
}

void add_fit_options(CLI::App* sub, FitOptions& f) {
  sub->add_option("--cv", f.cv, "cross-validation folds")->check(CLI::Range(2, 1000000));
  sub->add_option("--grid", f.grid, "lambda grid size")->check(CLI::Range(2, 100000));
  sub->add_option("--grid-ratio", f.grid_ratio, "smallest / largest lambda");
  sub->add_option("--eta", f.eta, "elastic-net L1 share");
  sub->add_option("--gamma", f.gamma, "adaptive-lasso exponent");
  sub->add_option("--lambda", f.lambda, "fixed lambda (skips cross-validation)");
  sub->add_option("--folds", f.folds, "contiguous | shuffled");
  sub->add_option("--cv-rule", f.cv_rule, "min | 1se");
  sub->add_option("--h", f.horizon, "forecast horizon in days")->check(CLI::PositiveNumber);
}

void add_scheme_options(CLI::App* sub, SchemeOptions& s) {
  sub->add_option("--bench", s.bench, "benchmark model variant[:penalty[:scope]]");
  sub->add_option("--model", s.models, "comma-separated forecast models");
  sub->add_option("--scheme", s.scheme, "rolling | expanding");
  sub->add_option("--window", s.window, "estimation window (initial size when expanding)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--loss", s.loss, "squared | absolute");
  sub->add_option("--firms", s.firms, "'all' or comma-separated firm ids");
  sub->add_option("--cv-refresh", s.cv_refresh, "re-run cross-validation every N windows")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--floor-zero", s.floor_zero, "clamp negative forecasts at 0");
}

void add_test_options(CLI::App* sub, TestOptions& t) {
  sub->add_option("--tests", t.tests, "comma-separated subset of dm,cw,gw");
  sub->add_option("--alpha", t.alpha, "significance level");
  sub->add_option("--gw-instruments", t.gw_instruments, "constant | lagged");
  sub->add_option("--format", t.formats, "comma-separated subset of text,csv,json");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& f : csv::split(text))
    if (!f.empty()) out.push_back(f);
  return out;
}

std::string slug(std::string label) {
  std::replace(label.begin(), label.end(), ':', '-');
  return label;
}

RealizedPanel load_input(const fs::path& path, bool& intraday) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw Error(ErrorCode::ParseError, path.string() + " is empty");
  const auto header = csv::split(lines.front());
  intraday = std::find(header.begin(), header.end(), "seq") != header.end();
  try {
    if (intraday) return build_realized_panel(parse_intraday(lines));
    return lines.front().find(':') != std::string::npos ? parse_measures(lines)
                                                          : parse_daily_rv(lines);
  } catch (const Error& e) {
    rethrow_with_context(e, path.string());
  }
}

std::vector<std::size_t> select_firms(const RealizedPanel& panel, const std::string& spec) {
  std::vector<std::size_t> out;
  if (spec == "all") {
    for (std::size_t f = 0; f < panel.firm_count(); ++f) out.push_back(f);
    return out;
  }
  for (const auto& name : split_list(spec)) out.push_back(panel.firm_index(name));
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "no firms selected");
  return out;
}

ModelConfig configure(ModelConfig m, const FitOptions& f) {
  m.cv_folds = f.cv;
  m.grid_size = f.grid;
  m.grid_ratio = f.grid_ratio;
  m.eta = f.eta;
  m.gamma = f.gamma;
  m.spec.horizon = f.horizon;
  if (!f.lambda.empty()) m.lambda = csv::parse_double(f.lambda, "lambda");
  if (f.folds == "contiguous") {
    m.fold_scheme = FoldScheme::Contiguous;
  } else if (f.folds == "shuffled") {
    m.fold_scheme = FoldScheme::Shuffled;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown fold scheme '" + f.folds + "'");
  }
  if (f.cv_rule == "min") {
    m.cv_rule = CvRule::Min;
  } else if (f.cv_rule == "1se") {
    m.cv_rule = CvRule::OneStandardError;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown cv rule '" + f.cv_rule + "'");
  }
  return m;
}

std::map<std::string, std::string> option_values(const CLI::App* sub) {
  std::map<std::string, std::string> out;
  for (const auto* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "threads" ||
        name == "out") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    out[name] = value;
  }
  return out;
}

// Appends settings from --config for every key not given on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  auto given = [&](const std::string& key) {
    const auto flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  for (const auto& raw : csv::read_lines(path)) {
    std::string line = raw;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "config line '" + line + "' is not key=value");
    std::string key = line.substr(first, eq - first);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    std::string value = line.substr(eq + 1);
    const auto vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? "" : value.substr(vs);
    // An empty value records an option left unset.
    if (value.empty() || given(key)) continue;
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

int exit_code(ErrorCode code) {
  switch (category(code)) {
    case ErrorCategory::Config: return kExitConfig;
    case ErrorCategory::Data: return kExitData;
    case ErrorCategory::Numerical: return kExitNumerical;
  }
  return kExitNumerical;
}

std::string short_double(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// ---- subcommands ------------------------------------------------------------

void cmd_measures(const std::string& input, const Common& c, const CLI::App* sub, std::ostream& out) {
  bool intraday = false;
  const auto panel = load_input(input, intraday);
  const fs::path dir(c.out);
  std::vector<fs::path> outputs;
  if (intraday) {
    write_measures(panel, dir / "measures.csv");
    outputs.emplace_back("measures.csv");
  } else {
    write_daily_rv(panel, dir / "daily_rv.csv");
    outputs.emplace_back("daily_rv.csv");
  }
  const auto summary = format_summary(summarize(panel));
  csv::write_file(dir / "summary.txt", summary);
  outputs.emplace_back("summary.txt");
  write_manifest(dir, {"measures", option_values(sub), {fs::path(input)}, outputs});
  out << summary;
}

void cmd_fit(const std::string& input, const std::string& spec, const std::string& penalty,
             const std::string& scope, const std::string& firms, const FitOptions& fo,
             const Common& c, const CLI::App* sub, std::ostream& out) {
  bool intraday = false;
  const auto panel = load_input(input, intraday);
  std::string text = spec + ":" + penalty;
  if (!scope.empty()) text += ":" + scope;
  const auto model = configure(parse_model(text), fo);
  const auto label = model_label(model);

  std::ostringstream csv_out;
  csv_out << "firm,model,term,coefficient,active\n";
  nlohmann::json fits = nlohmann::json::array();
  for (std::size_t f : select_firms(panel, firms)) {
    const auto& name = panel.firms[f];
    try {
      const auto dm = build_design(panel, f, model.spec);
      const auto fm = fit_model(dm.X, dm.y, model, std::nullopt, derive_seed(c.seed, f));
      const auto coef = fm.original_scale();
      csv_out << name << ',' << label << ",(intercept)," << csv::format_double(coef.intercept)
              << ",1\n";
      nlohmann::json terms = nlohmann::json::array();
      std::vector<std::string> active;
      for (std::size_t j = 0; j < dm.column_names.size(); ++j) {
        const double b = coef.slopes(static_cast<Eigen::Index>(j));
        csv_out << name << ',' << label << ',' << dm.column_names[j] << ','
                << csv::format_double(b) << ',' << (b != 0.0 ? 1 : 0) << "\n";
        terms.push_back({{"term", dm.column_names[j]}, {"coefficient", b}});
        if (b != 0.0) active.push_back(dm.column_names[j]);
      }
      nlohmann::json jf = {{"firm", name},
                           {"model", label},
                           {"rows", dm.row_count()},
                           {"lambda", fm.lambda},
                           {"intercept", coef.intercept},
                           {"coefficients", std::move(terms)},
                           {"active_set", active}};
      if (fm.cv)
        jf["cv"] = {{"lambda_grid", fm.cv->lambda_grid},
                    {"cv_error", fm.cv->cv_error},
                    {"chosen_index", fm.cv->chosen_index},
                    {"folds", fm.cv->folds}};
      fits.push_back(std::move(jf));
      out << name << ' ' << label << " lambda=" << short_double(fm.lambda) << " active=" << active.size()
          << "/" << dm.column_names.size() << "\n";
    } catch (const Error& e) {
      rethrow_with_context(e, "firm " + name);
    }
  }
  const fs::path dir(c.out);
  csv::write_file(dir / "coefficients.csv", csv_out.str());
  csv::write_file(dir / "coefficients.json", fits.dump(2) + "\n");
  write_manifest(dir, {"fit", option_values(sub), {fs::path(input)},
                       {"coefficients.csv", "coefficients.json"}});
}

std::vector<ForecastRun> forecast_all(const RealizedPanel& panel, const SchemeOptions& so,
                                      const FitOptions& fo, const Common& c) {
  const auto bench = configure(parse_model(so.bench), fo);
  std::vector<ModelConfig> models;
  for (const auto& m : split_list(so.models)) models.push_back(configure(parse_model(m), fo));
  if (models.empty()) throw Error(ErrorCode::InvalidConfig, "no forecast models given");
  SchemeConfig cfg;
  cfg.scheme = parse_scheme(so.scheme);
  cfg.window = so.window;
  cfg.horizon = fo.horizon;
  cfg.loss = parse_loss(so.loss);
  cfg.cv_refresh = so.cv_refresh;
  cfg.floor_zero = so.floor_zero;

  const auto firms = select_firms(panel, so.firms);
  const std::size_t jobs = firms.size() * models.size();
  const bool outer = jobs >= c.threads;
  cfg.threads = outer ? 1 : c.threads;
  std::vector<ForecastRun> runs(jobs);
  parallel_for(jobs, outer ? c.threads : 1, [&](std::size_t k) {
    const std::size_t f = firms[k / models.size()];
    runs[k] = run_scheme(panel, f, bench, models[k % models.size()], cfg, derive_seed(c.seed, k));
  });
  return runs;
}

std::vector<fs::path> write_runs(const std::vector<ForecastRun>& runs, const fs::path& dir,
                                 const fs::path& prefix, std::ostream& out) {
  std::vector<fs::path> files;
  for (const auto& r : runs) {
    const auto name = prefix / (r.firm + "__" + slug(r.model_label) + ".csv");
    write_run(dir / name, r);
    files.push_back(name);
    out << r.firm << ' ' << r.model_label << " n=" << r.size() << " mspe1=" << short_double(mspe(r.e1))
        << " mspe2=" << short_double(mspe(r.e2)) << "\n";
  }
  return files;
}

std::vector<fs::path> write_tables(const std::vector<ForecastRun>& runs, const TestOptions& to,
                                   const fs::path& dir, const fs::path& prefix, std::ostream& out) {
  EvaluationOptions eo;
  eo.tests.clear();
  for (const auto& t : split_list(to.tests)) eo.tests.push_back(parse_test(t));
  if (eo.tests.empty()) throw Error(ErrorCode::InvalidConfig, "no tests requested");
  if (to.gw_instruments == "lagged") {
    eo.gw_instruments = GwInstruments::Lagged;
  } else if (to.gw_instruments == "constant") {
    eo.gw_instruments = GwInstruments::Constant;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown GW instruments '" + to.gw_instruments + "'");
  }
  if (!(to.alpha > 0.0 && to.alpha < 1.0))
    throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0,1)");
  std::vector<TableFormat> formats;
  for (const auto& f : split_list(to.formats)) {
    if (f == "text") formats.push_back(TableFormat::Text);
    else if (f == "csv") formats.push_back(TableFormat::Csv);
    else if (f == "json") formats.push_back(TableFormat::Json);
    else throw Error(ErrorCode::InvalidConfig, "unknown table format '" + f + "'");
  }

  std::vector<TestRecord> records;
  for (const auto& r : runs) {
    auto rec = evaluate_run(r, eo);
    std::move(rec.begin(), rec.end(), std::back_inserter(records));
  }
  const auto tables = build_tables(records, to.alpha);
  if (tables.empty()) throw Error(ErrorCode::EmptyResults, "no forecast runs to test");

  std::vector<fs::path> files;
  files.push_back(prefix / "epa_results.csv");
  csv::write_file(dir / files.back(), format_records(records, to.alpha));
  for (const auto& t : tables) {
    std::string stem(to_string(t.test));
    std::transform(stem.begin(), stem.end(), stem.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    for (auto fmt : formats) {
      const char* ext = fmt == TableFormat::Text ? ".txt" : fmt == TableFormat::Csv ? ".csv" : ".json";
      files.push_back(prefix / (stem + "_table" + ext));
      csv::write_file(dir / files.back(), render_table(t, fmt));
    }
    out << render_table(t, TableFormat::Text) << "\n";
  }
  return files;
}

void cmd_forecast(const std::string& input, const SchemeOptions& so, const FitOptions& fo,
                  const Common& c, const CLI::App* sub, std::ostream& out) {
  bool intraday = false;
  const auto panel = load_input(input, intraday);
  const auto runs = forecast_all(panel, so, fo, c);
  const fs::path dir(c.out);
  const auto files = write_runs(runs, dir, "", out);
  write_manifest(dir, {"forecast", option_values(sub), {fs::path(input)}, files});
}

void cmd_test(const std::string& runs_dir, const TestOptions& to, const Common& c,
              const CLI::App* sub, std::ostream& out) {
  std::vector<fs::path> inputs;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(runs_dir, ec)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        name.find("__") != std::string::npos)
      inputs.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::IoError, "cannot list " + runs_dir + ": " + ec.message());
  std::sort(inputs.begin(), inputs.end());
  std::vector<ForecastRun> runs;
  for (const auto& p : inputs) runs.push_back(read_run(p));
  const fs::path dir(c.out);
  const auto files = write_tables(runs, to, dir, "", out);
  write_manifest(dir, {"test", option_values(sub), inputs, files});
}

struct SimOptions {
  std::string preset = "sv-jumps";
  std::size_t firms = 10;
  std::size_t days = 1500;
  std::size_t steps = 390;
  std::size_t burn_in = 500;
  double noise_sd = 0.2;
  std::size_t cross = 0;
};

void cmd_simulate(const SimOptions& so, const Common& c, const CLI::App* sub, std::ostream& out) {
  const fs::path dir(c.out);
  std::vector<fs::path> outputs;
  if (so.preset == "har") {
    HarPanelConfig cfg;
    const auto n = static_cast<Eigen::Index>(so.firms);
    cfg.days = so.days;
    cfg.burn_in = so.burn_in;
    cfg.intercepts = Eigen::VectorXd::Ones(n);
    cfg.phi = benchmark_phi(so.firms, 0.35, 0.3, 0.2);
    if (so.cross >= so.firms && so.cross > 0)
      throw Error(ErrorCode::InvalidConfig, "--cross must be below the number of firms");
    for (std::size_t k = 1; k <= so.cross; ++k) cfg.phi(0, static_cast<Eigen::Index>(3 * k)) = 0.1;
    cfg.noise_sd = so.noise_sd;
    cfg.seed = c.seed;
    const auto sim = simulate_har_panel(cfg);
    write_daily_rv(sim.panel, dir / "daily_rv.csv");
    std::ostringstream phi;
    phi << "firm,intercept";
    for (const auto& f : sim.panel.firms) phi << ",RV_d[" << f << "],RV_w[" << f << "],RV_m[" << f << "]";
    phi << "\n";
    for (Eigen::Index i = 0; i < n; ++i) {
      phi << sim.panel.firms[static_cast<std::size_t>(i)] << ','
          << csv::format_double(sim.intercepts(i));
      for (Eigen::Index j = 0; j < sim.phi.cols(); ++j) phi << ',' << csv::format_double(sim.phi(i, j));
      phi << "\n";
    }
    csv::write_file(dir / "phi.csv", phi.str());
    outputs = {"daily_rv.csv", "phi.csv"};
    out << "simulated HAR panel: " << so.firms << " firms x " << so.days << " days\n";
  } else {
    auto cfg = dgp_preset(so.preset);
    cfg.firms = so.firms;
    cfg.days = so.days;
    cfg.steps = so.steps;
    cfg.seed = c.seed;
    const auto sim = simulate_paths(cfg);
    write_intraday(sim.intraday, dir / "intraday.csv");
    csv::write_file(dir / "truth.csv", format_truth(sim));
    outputs = {"intraday.csv", "truth.csv"};
    out << "simulated " << so.preset << ": " << so.firms << " firms x " << so.days << " days x "
        << so.steps << " steps\n";
  }
  write_manifest(dir, {"simulate", option_values(sub), {}, outputs});
}

void cmd_report(const std::string& input, const SchemeOptions& so, const FitOptions& fo,
                const TestOptions& to, const Common& c, const CLI::App* sub, std::ostream& out) {
  bool intraday = false;
  const auto panel = load_input(input, intraday);
  const fs::path dir(c.out);
  std::vector<fs::path> outputs;
  const auto summary = format_summary(summarize(panel));
  csv::write_file(dir / "summary.txt", summary);
  outputs.emplace_back("summary.txt");
  if (intraday) {
    write_measures(panel, dir / "measures.csv");
    outputs.emplace_back("measures.csv");
  }
  out << summary << "\n";
  const auto runs = forecast_all(panel, so, fo, c);
  for (auto& p : write_runs(runs, dir, "runs", out)) outputs.push_back(std::move(p));
  out << "\n";
  for (auto& p : write_tables(runs, to, dir, "tables", out)) outputs.push_back(std::move(p));
  write_manifest(dir, {"report", option_values(sub), {fs::path(input)}, outputs});
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Realized-volatility forecasting with cross-sectional shrinkage"};
  app.name("volcast");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  // -h is taken by the horizon option.
  app.set_help_flag("--help", "print this help and exit");

  Common common;
  FitOptions fit_opts;
  SchemeOptions scheme_opts;
  TestOptions test_opts;
  SimOptions sim_opts;
  std::string input, runs_dir, fit_spec = "har", fit_penalty = "lasso", fit_scope, fit_firms = "all";

  auto* measures = app.add_subcommand("measures", "daily realized measures and summary statistics");
  measures->add_option("--input,--in", input, "intraday long CSV or daily panel CSV")->required();
  add_common(measures, common);

  auto* fit = app.add_subcommand("fit", "fit one model per firm on the full sample");
  fit->add_option("--input,--in", input, "panel CSV")->required();
  fit->add_option("--spec", fit_spec, "har | harq | harq-f | har-j | char");
  fit->add_option("--penalty", fit_penalty, "ols | lasso | alasso | enet");
  fit->add_option("--scope", fit_scope, "bench | cross (default: bench for ols, else cross)");
  fit->add_option("--firms", fit_firms, "'all' or comma-separated firm ids");
  add_fit_options(fit, fit_opts);
  add_common(fit, common);

  auto* forecast = app.add_subcommand("forecast", "pseudo out-of-sample forecast runs");
  forecast->add_option("--input,--in", input, "panel CSV")->required();
  add_scheme_options(forecast, scheme_opts);
  add_fit_options(forecast, fit_opts);
  add_common(forecast, common);

  auto* test = app.add_subcommand("test", "equal predictive accuracy tests on forecast runs");
  test->add_option("--runs", runs_dir, "directory written by 'forecast'")->required();
  add_test_options(test, test_opts);
  add_common(test, common);

  auto* simulate = app.add_subcommand("simulate", "synthetic intraday paths or HAR panels");
  simulate->add_option("--preset", sim_opts.preset, "constant | sv | sv-jumps | har");
  simulate->add_option("--N", sim_opts.firms, "firms")->check(CLI::PositiveNumber);
  simulate->add_option("--T", sim_opts.days, "days")->check(CLI::PositiveNumber);
  simulate->add_option("--M", sim_opts.steps, "intraday steps per day");
  simulate->add_option("--burn-in", sim_opts.burn_in, "discarded days (har preset)");
  simulate->add_option("--noise-sd", sim_opts.noise_sd, "innovation sd (har preset)");
  simulate->add_option("--cross", sim_opts.cross, "cross-firm daily loadings on F01 (har preset)");
  add_common(simulate, common);

  auto* report = app.add_subcommand("report", "measures, forecasts and test tables in one run");
  report->add_option("--input,--in", input, "intraday long CSV or daily panel CSV")->required();
  add_scheme_options(report, scheme_opts);
  add_fit_options(report, fit_opts);
  add_test_options(report, test_opts);
  add_common(report, common);

  std::vector<std::string> args;
  try {
    args = merge_config(raw_args);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::IoError ? kExitConfig : exit_code(e.code());
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*measures) cmd_measures(input, common, measures, out);
    else if (*fit) cmd_fit(input, fit_spec, fit_penalty, fit_scope, fit_firms, fit_opts, common, fit, out);
    else if (*forecast) cmd_forecast(input, scheme_opts, fit_opts, common, forecast, out);
    else if (*test) cmd_test(runs_dir, test_opts, common, test, out);
    else if (*simulate) cmd_simulate(sim_opts, common, simulate, out);
    else if (*report) cmd_report(input, scheme_opts, fit_opts, test_opts, common, report, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace volcast
