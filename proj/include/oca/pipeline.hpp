#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oca/cointegration.hpp"
#include "oca/oca_metrics.hpp"
#include "oca/series_store.hpp"
#include "oca/svar_id.hpp"
#include "oca/unit_root.hpp"
#include "oca/var_engine.hpp"

namespace oca {

struct CountryDummy {
  std::string country;
  DummySpec spec;
};

// COUNTRY:VAR:YYYY-MM:step|pulse[:both|own]
CountryDummy parse_dummy(std::string_view text);
std::string format_dummy(const CountryDummy& d);

// Comma-separated YYYY-MM list.
std::vector<YearMonth> parse_date_list(std::string_view text);

struct PipelineConfig {
  std::string panel_path;
  std::string weights_path;
  int base_year = 2010;
  double alpha = 0.05;
  int max_lags = 12;
  double hp_lambda = 14400.0;
  std::vector<CountryDummy> dummies;
  int irf_horizon = 48;
  std::string output_dir;
  std::uint64_t seed = 42;
  std::vector<YearMonth> snapshot_dates = {{2010, 1}, {2015, 1}, {2020, 1}};
  // Trend-change window for the dispersion trends; the full span when unset.
  std::optional<std::pair<YearMonth, YearMonth>> trend_window;
  bool seasonal_adjust = false;
  int portmanteau_h = 12;
  int arch_q = 4;
  // Worker threads for per-country stages; 0 picks the hardware count.
  int threads = 0;

  // Throws invalid_config.
  void validate() const;
  // Applies the keys of a flat JSON object; unknown keys are rejected.
  void apply_json(const nlohmann::json& j);
};

PipelineConfig load_config_file(const std::string& path);

// Log levels (rebased, optionally seasonally adjusted) and their differences.
struct CountryInputs {
  std::string country;
  std::array<DatedSeries, 2> log_levels;
  std::array<TransformedSeries, 2> growth;
  std::vector<DummySpec> dummies;
};

CountryInputs prepare_country(const Panel& panel, const std::string& country, const PipelineConfig& config);

struct AdfRow {
  AdfResult level;
  AdfResult first_diff;
  int order = 1;
};

struct CountryEstimate {
  CountryInputs inputs;
  std::array<AdfRow, 2> adf;
  LagSelection lags;
  VarModel model;
  StabilityReport stability;
  int portmanteau_h = 0;
  TestResult portmanteau;
  std::array<TestResult, 2> arch;
  JohansenResult johansen;
  StructuralModel structural;
  IrfSet irf;
  SizeSpeed size_speed;
};

// Lag selection, VAR fit and diagnostics for prepared inputs.
VarModel fit_country_var(const CountryInputs& inputs, const PipelineConfig& config, LagSelection* lags = nullptr);
CountryEstimate estimate_country(const Panel& panel, const std::string& country, const PipelineConfig& config);
// Runs estimate_country for every panel country on `config.threads` workers;
// results are in panel order and the first failure (in panel order) is rethrown.
std::vector<CountryEstimate> estimate_all(const Panel& panel, const PipelineConfig& config);

ShockPanel shock_panel(const std::vector<CountryEstimate>& estimates, Shock kind);

// Output file name -> content. Assembled fully before anything is written.
struct ReportBundle {
  std::map<std::string, std::string> files;
  nlohmann::json report;
};

ReportBundle run_pipeline(const PipelineConfig& config);
// Writes every bundle file into `dir`; on failure removes what was written.
void write_bundle(const ReportBundle& bundle, const std::string& dir);

// "*", "**", "***" for p < 0.10, 0.05, 0.01.
std::string significance_stars(double p);
// Fixed 3-decimal rendering used by the human-readable tables.
std::string format3(double v);

}  // namespace oca
