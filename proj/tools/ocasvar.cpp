// ocasvar: structural shock extraction and currency-area diagnostics.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oca/error.hpp"
#include "oca/pipeline.hpp"
#include "oca/synth_oracle.hpp"

namespace {

using nlohmann::json;
using namespace oca;

std::string full(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Flag values as parsed; merged over the config file by build_config.
struct Flags {
  std::string config, panel, weights, output_dir, snapshot_dates, trend_window;
  int base_year = 0, max_lags = 0, irf_horizon = 0, threads = 0, portmanteau_h = 0, arch_q = 0;
  double alpha = 0, hp_lambda = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> dummies;
  bool seasonal_adjust = false;
  bool json_out = false;
  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_common(CLI::App& app, Flags& f) {
  f.opts["config"] = app.add_option("--config", f.config, "Flat JSON config file; flags override its keys");
  f.opts["panel"] = app.add_option("--panel", f.panel, "Panel CSV (country,date,variable,value)");
  f.opts["weights"] = app.add_option("--weights", f.weights, "Weights CSV (year,country,weight)");
  f.opts["base-year"] = app.add_option("--base-year", f.base_year, "Rebasing year (default 2010)");
  f.opts["alpha"] = app.add_option("--alpha", f.alpha, "Symmetry significance level (default 0.05)");
  f.opts["max-lags"] = app.add_option("--max-lags", f.max_lags, "Maximum lag for ADF and VAR selection (default 12)");
  f.opts["hp-lambda"] = app.add_option("--hp-lambda", f.hp_lambda, "HP smoothing parameter (default 14400)");
  f.opts["irf-horizon"] = app.add_option("--irf-horizon", f.irf_horizon, "Impulse response horizon in months (default 48)");
  f.opts["output-dir"] = app.add_option("--output-dir", f.output_dir, "Report directory");
  f.opts["seed"] = app.add_option("--seed", f.seed, "Seed for simulation (default 42)");
  f.opts["snapshot-dates"] = app.add_option("--snapshot-dates", f.snapshot_dates, "Cost table dates, comma-separated YYYY-MM");
  f.opts["dummy"] = app.add_option("--dummy", f.dummies, "COUNTRY:VAR:YYYY-MM:step|pulse[:both|own], repeatable");
  f.opts["seasonal-adjust"] = app.add_flag("--seasonal-adjust", f.seasonal_adjust, "Remove monthly dummies from log levels");
  f.opts["trend-window"] = app.add_option("--trend-window", f.trend_window, "Dispersion trend-change window FROM,TO");
  f.opts["threads"] = app.add_option("--threads", f.threads, "Worker threads for per-country stages (0 = hardware)");
  f.opts["portmanteau-h"] = app.add_option("--portmanteau-h", f.portmanteau_h, "Portmanteau horizon (default 12)");
  f.opts["arch-q"] = app.add_option("--arch-q", f.arch_q, "ARCH-LM lags (default 4)");
  app.add_flag("--json", f.json_out, "JSON instead of CSV on standard output");
}

PipelineConfig build_config(const Flags& f) {
  PipelineConfig c = f.given("config") ? load_config_file(f.config) : PipelineConfig{};
  if (f.given("panel")) c.panel_path = f.panel;
  if (f.given("weights")) c.weights_path = f.weights;
  if (f.given("base-year")) c.base_year = f.base_year;
  if (f.given("alpha")) c.alpha = f.alpha;
  if (f.given("max-lags")) c.max_lags = f.max_lags;
  if (f.given("hp-lambda")) c.hp_lambda = f.hp_lambda;
  if (f.given("irf-horizon")) c.irf_horizon = f.irf_horizon;
  if (f.given("output-dir")) c.output_dir = f.output_dir;
  if (f.given("seed")) c.seed = f.seed;
  if (f.given("snapshot-dates")) c.snapshot_dates = parse_date_list(f.snapshot_dates);
  if (f.given("dummy")) {
    c.dummies.clear();
    for (const auto& d : f.dummies) c.dummies.push_back(parse_dummy(d));
  }
  if (f.given("seasonal-adjust")) c.seasonal_adjust = f.seasonal_adjust;
  if (f.given("trend-window")) {
    auto d = parse_date_list(f.trend_window);
    if (d.size() != 2) throw Error(ErrorCode::invalid_config, "--trend-window needs FROM,TO");
    c.trend_window = std::make_pair(d[0], d[1]);
  }
  if (f.given("threads")) c.threads = f.threads;
  if (f.given("portmanteau-h")) c.portmanteau_h = f.portmanteau_h;
  if (f.given("arch-q")) c.arch_q = f.arch_q;
  return c;
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw Error(ErrorCode::invalid_config, std::string(what) + " is required");
}

// Checks shared by subcommands that never reach PipelineConfig::validate.
void validate_partial(const PipelineConfig& c) {
  PipelineConfig probe = c;
  if (probe.panel_path.empty()) probe.panel_path = "-";
  if (probe.weights_path.empty()) probe.weights_path = "-";
  if (probe.output_dir.empty()) probe.output_dir = "-";
  probe.validate();
}

// One-column or `date,value` CSV; a header line is skipped if it does not parse.
std::vector<double> read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open series '" + path + "'");
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.rfind(',');
    std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
      out.push_back(v);
    } catch (const std::exception&) {
      if (lineno == 1) continue;
      throw Error(ErrorCode::parse_error, path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
    }
  }
  return out;
}

Shock kind_or(const std::string& text) { return text.empty() ? Shock::supply : parse_shock(text); }

int cmd_run(const Flags& f) {
  PipelineConfig c = build_config(f);
  c.validate();
  ReportBundle bundle = run_pipeline(c);
  write_bundle(bundle, c.output_dir);
  if (f.json_out) std::cout << bundle.files.at("report.json");
  else std::cout << bundle.files.at("tables.txt");
  return 0;
}

int cmd_adf(const Flags& f, const std::string& series, const std::string& spec_text) {
  PipelineConfig c = build_config(f);
  validate_partial(c);
  require(series, "--series");
  const AdfSpec spec = parse_adf_spec(spec_text);
  const auto values = read_series(series);
  const AdfResult r = adf_test(values, spec, c.max_lags);
  if (f.json_out) {
    json j = {{"spec", std::string(to_string(r.spec))}, {"statistic", r.statistic}, {"lags_used", r.lags_used},
              {"nobs", r.nobs}, {"critical_values", r.critical_values},
              {"reject_at", r.reject_at ? json(*r.reject_at) : json(nullptr)}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "spec,statistic,lags_used,nobs,cv_1pct,cv_5pct,cv_10pct,reject_at\n"
              << to_string(r.spec) << ',' << full(r.statistic) << ',' << r.lags_used << ',' << r.nobs << ','
              << full(r.critical_values[0]) << ',' << full(r.critical_values[1]) << ',' << full(r.critical_values[2]) << ','
              << (r.reject_at ? full(*r.reject_at) : "") << '\n';
  }
  return 0;
}

int cmd_johansen(const Flags& f, const std::string& country, int lag) {
  PipelineConfig c = build_config(f);
  validate_partial(c);
  require(c.panel_path, "--panel");
  require(country, "--country");
  const Panel panel = load_panel_file(c.panel_path);
  const CountryInputs in = prepare_country(panel, country, c);
  const JohansenResult r = johansen_test(in.log_levels[0].values, in.log_levels[1].values, lag);
  if (f.json_out) {
    json j = {{"country", country}, {"nobs", r.nobs}, {"lag_order", r.lag_order}, {"eigenvalues", r.eigenvalues},
              {"trace_stats", r.trace_stats}, {"max_eig_stats", r.max_eig_stats},
              {"critical_values_trace", r.critical_values_trace}, {"critical_values_maxeig", r.critical_values_maxeig},
              {"selected_rank", r.selected_rank}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "country,hypothesis,eigenvalue,trace_statistic,trace_cv,max_eig_statistic,max_eig_cv,selected_rank\n";
    for (std::size_t i = 0; i < 2; ++i) {
      std::cout << country << ',' << (i == 0 ? "r=0" : "r<=1") << ',' << full(r.eigenvalues[i]) << ','
                << full(r.trace_stats[i]) << ',' << full(r.critical_values_trace[i]) << ',' << full(r.max_eig_stats[i])
                << ',' << full(r.critical_values_maxeig[i]) << ',' << r.selected_rank << '\n';
    }
  }
  return 0;
}

std::string regressor_name(const VarModel& m, Eigen::Index col) {
  if (col == 0) return "const";
  const Eigen::Index lagged = 2 * m.p;
  if (col <= lagged) {
    const auto k = (col - 1) / 2 + 1;
    return std::string((col - 1) % 2 == 0 ? "MEAI" : "CPI") + ".l" + std::to_string(k);
  }
  const auto& d = m.dummies[static_cast<std::size_t>(col - lagged - 1)];
  return std::string(to_string(d.form)) + "_" + std::string(panel_code(d.variable)) + "_" + d.break_date.str();
}

int cmd_var(const Flags& f, const std::string& country) {
  PipelineConfig c = build_config(f);
  validate_partial(c);
  require(c.panel_path, "--panel");
  require(country, "--country");
  const Panel panel = load_panel_file(c.panel_path);
  const CountryInputs in = prepare_country(panel, country, c);
  LagSelection sel;
  const VarModel m = fit_country_var(in, c, &sel);
  const StabilityReport st = stability(m);
  if (f.json_out) {
    json coef = json::array();
    for (int eq = 0; eq < 2; ++eq) {
      for (auto col : m.equation_columns[static_cast<std::size_t>(eq)]) {
        coef.push_back({{"equation", eq == 0 ? "MEAI" : "CPI"}, {"regressor", regressor_name(m, col)},
                        {"coefficient", num(m.coefficients(eq, col))}, {"standard_error", num(m.standard_errors(eq, col))}});
      }
    }
    json j = {{"country", country}, {"p", m.p}, {"aic_p", sel.aic_p}, {"sc_p", sel.sc_p}, {"hq_p", sel.hq_p},
              {"nobs", m.nobs()}, {"max_modulus", st.max_modulus()}, {"stable", st.stable},
              {"sigma", {{m.sigma(0, 0), m.sigma(0, 1)}, {m.sigma(1, 0), m.sigma(1, 1)}}}, {"coefficients", coef}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "country,p,equation,regressor,coefficient,standard_error\n";
    for (int eq = 0; eq < 2; ++eq) {
      for (auto col : m.equation_columns[static_cast<std::size_t>(eq)]) {
        std::cout << country << ',' << m.p << ',' << (eq == 0 ? "MEAI" : "CPI") << ',' << regressor_name(m, col) << ','
                  << full(m.coefficients(eq, col)) << ',' << full(m.standard_errors(eq, col)) << '\n';
      }
    }
  }
  return 0;
}

int cmd_identify(const Flags& f, const std::string& country) {
  PipelineConfig c = build_config(f);
  validate_partial(c);
  require(c.panel_path, "--panel");
  require(country, "--country");
  const Panel panel = load_panel_file(c.panel_path);
  const CountryInputs in = prepare_country(panel, country, c);
  const VarModel m = fit_country_var(in, c);
  const StructuralModel s = identify_bq(m);
  if (f.json_out) {
    const IrfSet irf = irf_structural(s, m, c.irf_horizon);
    const SizeSpeed ss = size_and_speed(irf);
    json shocks = json::array();
    for (Eigen::Index t = 0; t < s.shocks.rows(); ++t) {
      shocks.push_back({{"date", s.dates[static_cast<std::size_t>(t)].str()}, {"supply", s.shocks(t, 0)}, {"demand", s.shocks(t, 1)}});
    }
    json j = {{"country", country}, {"p", m.p},
              {"a0", {{s.a0(0, 0), s.a0(0, 1)}, {s.a0(1, 0), s.a0(1, 1)}}},
              {"long_run", {{s.long_run(0, 0), s.long_run(0, 1)}, {s.long_run(1, 0), s.long_run(1, 1)}}},
              {"size_speed", {{"supply_size", ss.supply_size}, {"supply_speed", ss.supply_speed},
                              {"demand_size", ss.demand_size}, {"demand_speed", ss.demand_speed}}},
              {"shocks", shocks}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "country,date,supply_shock,demand_shock\n";
    write_shock_rows(std::cout, country, s);
  }
  return 0;
}

std::vector<CountryEstimate> estimates_for(const PipelineConfig& c, const std::vector<std::string>& subset) {
  const Panel panel = load_panel_file(c.panel_path);
  std::vector<CountryEstimate> all = estimate_all(panel, c);
  if (subset.empty()) return all;
  std::vector<CountryEstimate> kept;
  for (auto& e : all) {
    if (std::find(subset.begin(), subset.end(), e.inputs.country) != subset.end()) kept.push_back(std::move(e));
  }
  if (kept.size() != subset.size()) throw Error(ErrorCode::invalid_argument, "--countries names a country not in the panel");
  return kept;
}

int cmd_correlate(const Flags& f, const std::string& kind_text, const std::vector<std::string>& subset) {
  PipelineConfig c = build_config(f);
  validate_partial(c);
  require(c.panel_path, "--panel");
  const Shock kind = kind_or(kind_text);
  const auto est = estimates_for(c, subset);
  const CorrelationReport r = correlation_matrix(shock_panel(est, kind));
  const SymmetryReport sym = classify_symmetry(r, c.alpha);
  if (f.json_out) {
    json pairs = json::array();
    for (std::size_t i = 0; i < r.countries.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        pairs.push_back({{"a", r.countries[i]}, {"b", r.countries[j]}, {"r", num(r.r(a, b))}, {"p", num(r.p(a, b))},
                         {"symmetric", bool(sym.symmetric[i][j])}});
      }
    std::cout << json{{"kind", std::string(to_string(kind))}, {"n", r.n}, {"pairs", pairs}, {"groups", sym.groups}}.dump(2) << '\n';
  } else {
    std::cout << "kind,country_a,country_b,n,r,p_value,stars,symmetric\n";
    for (std::size_t i = 0; i < r.countries.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        std::cout << to_string(kind) << ',' << r.countries[i] << ',' << r.countries[j] << ',' << r.n << ','
                  << full(r.r(a, b)) << ',' << full(r.p(a, b)) << ',' << significance_stars(r.p(a, b)) << ','
                  << (sym.symmetric[i][j] ? "true" : "false") << '\n';
      }
  }
  return 0;
}

int cmd_disperse(const Flags& f, const std::string& kind_text, const std::vector<std::string>& subset) {
  PipelineConfig c = build_config(f);
  validate_partial(c);
  require(c.panel_path, "--panel");
  require(c.weights_path, "--weights");
  const Shock kind = kind_or(kind_text);
  const WeightTable w = load_weights_file(c.weights_path);
  const auto est = estimates_for(c, subset);
  const DispersionSeries d = dispersion_index(shock_panel(est, kind), w);
  const HpResult hp = hp_filter(d.values, c.hp_lambda);
  if (f.json_out) {
    json dates = json::array();
    for (const auto& x : d.dates) dates.push_back(x.str());
    std::cout << json{{"kind", std::string(to_string(kind))}, {"dates", dates}, {"values", d.values}, {"trend", hp.trend},
                      {"cycle", hp.cycle}}.dump(2)
              << '\n';
  } else {
    std::cout << "date,kind,dispersion,trend,cycle\n";
    for (std::size_t t = 0; t < d.dates.size(); ++t) {
      std::cout << d.dates[t].str() << ',' << to_string(kind) << ',' << full(d.values[t]) << ',' << full(hp.trend[t]) << ','
                << full(hp.cycle[t]) << '\n';
    }
  }
  return 0;
}

int cmd_cost(const Flags& f, const std::string& exclude, const std::string& kind_text, const std::vector<std::string>& subset) {
  PipelineConfig c = build_config(f);
  validate_partial(c);
  require(c.panel_path, "--panel");
  require(c.weights_path, "--weights");
  require(exclude, "--exclude");
  const WeightTable w = load_weights_file(c.weights_path);
  const auto est = estimates_for(c, subset);
  std::vector<Shock> kinds = {Shock::supply, Shock::demand};
  if (!kind_text.empty()) kinds = {parse_shock(kind_text)};
  std::vector<CostSeries> costs;
  for (Shock k : kinds) costs.push_back(cost_of_inclusion(shock_panel(est, k), w, exclude));
  if (f.json_out) {
    json j = {{"country", exclude}};
    json dates = json::array();
    for (const auto& x : costs[0].dates) dates.push_back(x.str());
    j["dates"] = dates;
    for (const auto& cs : costs) {
      json vals = json::array();
      for (double v : cs.values) vals.push_back(num(v));
      j[std::string(to_string(cs.kind))] = vals;
    }
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "country,date";
    for (const auto& cs : costs) std::cout << ',' << to_string(cs.kind) << "_cost";
    std::cout << '\n';
    for (std::size_t t = 0; t < costs[0].dates.size(); ++t) {
      std::cout << exclude << ',' << costs[0].dates[t].str();
      for (const auto& cs : costs) std::cout << ',' << full(cs.values[t]);
      std::cout << '\n';
    }
  }
  return 0;
}

int cmd_simulate(const Flags& f, std::size_t months, const std::vector<std::string>& countries, double common_share) {
  PipelineConfig c = build_config(f);
  synth::FixtureOptions opt;
  opt.seed = c.seed;
  opt.months = months;
  opt.common_share = common_share;
  if (!countries.empty()) opt.countries = countries;
  const synth::Fixture fx = synth::make_fixture(opt);
  if (f.json_out) {
    json j = {{"seed", opt.seed}, {"months", opt.months}, {"countries", fx.panel.countries()}};
    json series = json::object();
    for (const auto& country : fx.panel.countries()) {
      for (Variable v : {Variable::activity, Variable::price}) {
        auto vals = fx.panel.values(fx.panel.country_index(country), v);
        series[country][std::string(panel_code(v))] = std::vector<double>(vals.begin(), vals.end());
      }
    }
    j["start"] = fx.panel.dates().front().str();
    j["series"] = series;
    std::cout << j.dump(2) << '\n';
  } else {
    write_panel(std::cout, fx.panel);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural supply/demand shocks and currency-area diagnostics"};
  app.require_subcommand(0, 1);
  Flags root_flags;
  add_common(app, root_flags);

  std::map<std::string, std::unique_ptr<Flags>> flags;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    flags[name] = std::make_unique<Flags>();
    add_common(*s, *flags[name]);
    return s;
  };

  sub("run", "Full pipeline; writes the report bundle to --output-dir");

  std::string series, spec = "trend";
  auto* adf = sub("adf", "Augmented Dickey-Fuller test on one series");
  adf->add_option("--series", series, "One-column or date,value CSV");
  adf->add_option("--spec", spec, "none | constant | trend")->capture_default_str();

  std::string country;
  int lag = 2;
  auto* joh = sub("johansen", "Johansen test on a country's log levels");
  joh->add_option("--country", country, "Country code");
  joh->add_option("--lag", lag, "VAR lag order in levels (>= 2)")->capture_default_str();

  auto* var = sub("var", "Lag selection and VAR fit for one country");
  var->add_option("--country", country, "Country code");
  auto* ident = sub("identify", "Long-run identification; structural shocks for one country");
  ident->add_option("--country", country, "Country code");

  std::string kind;
  std::vector<std::string> subset;
  auto* corr = sub("correlate", "Shock correlation matrix and symmetric groups");
  corr->add_option("--kind", kind, "supply | demand (default supply)");
  corr->add_option("--countries", subset, "Restrict to these countries")->delimiter(',');
  auto* disp = sub("disperse", "Dispersion index and HP trend");
  disp->add_option("--kind", kind, "supply | demand (default supply)");
  disp->add_option("--countries", subset, "Restrict to these countries")->delimiter(',');

  std::string exclude;
  auto* cost = sub("cost", "Cost-of-inclusion series for one country");
  cost->add_option("--exclude", exclude, "Country left out of the group");
  cost->add_option("--kind", kind, "supply | demand (default both)");
  cost->add_option("--countries", subset, "Group to evaluate")->delimiter(',');

  std::size_t months = 133;
  std::vector<std::string> sim_countries;
  double common_share = 0.2;
  auto* sim = sub("simulate", "Synthetic country panel in index levels");
  sim->add_option("--t", months, "Months per series")->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  sim->add_option("--countries", sim_countries, "Country codes")->delimiter(',');
  sim->add_option("--common-share", common_share, "Common share of shock variance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.get_subcommands().empty()) return cmd_run(root_flags);
    const std::string name = app.get_subcommands().front()->get_name();
    const Flags& f = *flags.at(name);
    if (name == "run") return cmd_run(f);
    if (name == "adf") return cmd_adf(f, series, spec);
    if (name == "johansen") return cmd_johansen(f, country, lag);
    if (name == "var") return cmd_var(f, country);
    if (name == "identify") return cmd_identify(f, country);
    if (name == "correlate") return cmd_correlate(f, kind, subset);
    if (name == "disperse") return cmd_disperse(f, kind, subset);
    if (name == "cost") return cmd_cost(f, exclude, kind, subset);
    if (name == "simulate") return cmd_simulate(f, months, sim_countries, common_share);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
