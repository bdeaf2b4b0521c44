#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "volcast/epa_tests.hpp"
#include "volcast/forecast_engine.hpp"

namespace volcast {

/// One test applied to one ForecastRun. `result` is empty when the test could
/// not be computed (for example identical forecasts); `note` then holds the
/// error code name.
struct TestRecord {
  std::string firm;
  std::string bench;
  std::string model;
  EpaTest test = EpaTest::DM;
  std::optional<EpaResult> result;
  std::string note;
};

struct EvaluationOptions {
  std::vector<EpaTest> tests{EpaTest::DM, EpaTest::CW, EpaTest::GW};
  GwInstruments gw_instruments = GwInstruments::Lagged;
};

/// Runs the requested tests on one run. Data-dependent test failures
/// (DegenerateSeries, SingularOmega, ExpandingSchemeRejected, too few
/// points) become records without a result. Also checks that the CW mean is
/// not below the DM mean on squared loss.
std::vector<TestRecord> evaluate_run(const ForecastRun& run, const EvaluationOptions& options);

struct EpaCell {
  std::optional<double> statistic;
  std::optional<double> p_value;
  std::string note;

  bool operator==(const EpaCell&) const = default;
};

/// Layout for one test: a row per firm and a stat/p pair per model.
struct EpaTable {
  EpaTest test = EpaTest::DM;
  double alpha = 0.05;
  std::vector<std::string> columns;  // model labels
  std::vector<std::string> firms;
  std::vector<std::vector<EpaCell>> cells;  // [firm][column]

  bool operator==(const EpaTable&) const = default;
};

/// Groups records by test; firms and models appear in first-seen order.
std::vector<EpaTable> build_tables(const std::vector<TestRecord>& records, double alpha);

enum class TableFormat { Text, Csv, Json };

/// Text uses three decimals and marks p < alpha with '*'; CSV and JSON keep
/// full precision. Throws EmptyResults for a table without rows.
std::string render_table(const EpaTable& table, TableFormat format);
EpaTable parse_table_json(std::string_view text);

/// Long format: firm,bench,model,test,stat,p,reject,n,bandwidth,q,note.
std::string format_records(const std::vector<TestRecord>& records, double alpha);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;  // relative to the output directory
};

/// Writes manifest.json (config, versions, seed, SHA-256 of inputs and
/// outputs) and config.ini (the same key=value settings, loadable with
/// --config) into `dir`.
void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);

std::string_view version() noexcept;

}  // namespace volcast
