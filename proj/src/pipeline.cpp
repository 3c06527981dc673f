#include "oca/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "oca/error.hpp"
#include "oca/stats.hpp"

namespace oca {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

CountryDummy parse_dummy(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(':', start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() != 4 && parts.size() != 5) {
    throw Error(ErrorCode::invalid_config, "dummy '" + std::string(text) + "' must be COUNTRY:VAR:YYYY-MM:step|pulse[:both|own]");
  }
  CountryDummy d;
  d.country = parts[0];
  if (d.country.empty()) throw Error(ErrorCode::invalid_config, "dummy without country");
  try {
    d.spec.variable = parse_variable(parts[1]);
    d.spec.break_date = YearMonth::parse(parts[2]);
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_config, "dummy '" + std::string(text) + "': " + e.detail());
  }
  if (parts[3] == "step") d.spec.form = DummySpec::Form::step;
  else if (parts[3] == "pulse") d.spec.form = DummySpec::Form::pulse;
  else throw Error(ErrorCode::invalid_config, "dummy form must be step or pulse, got '" + parts[3] + "'");
  if (parts.size() == 5) {
    if (parts[4] == "both") d.spec.scope = DummySpec::Scope::both;
    else if (parts[4] == "own") d.spec.scope = DummySpec::Scope::own;
    else throw Error(ErrorCode::invalid_config, "dummy scope must be both or own, got '" + parts[4] + "'");
  }
  return d;
}

std::string format_dummy(const CountryDummy& d) {
  std::string s = d.country + ":" + std::string(panel_code(d.spec.variable)) + ":" + d.spec.break_date.str() + ":" +
                  std::string(to_string(d.spec.form));
  if (d.spec.scope == DummySpec::Scope::own) s += ":own";
  return s;
}

std::vector<YearMonth> parse_date_list(std::string_view text) {
  std::vector<YearMonth> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = text.find(',', start);
    auto item = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      try {
        out.push_back(YearMonth::parse(item));
      } catch (const Error& e) {
        throw Error(ErrorCode::invalid_config, e.detail());
      }
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void PipelineConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::invalid_config, msg); };
  if (panel_path.empty()) bad("panel path is empty");
  if (weights_path.empty()) bad("weights path is empty");
  if (output_dir.empty()) bad("output directory is empty");
  if (!(alpha > 0.0 && alpha < 1.0)) bad("alpha must lie in (0, 1)");
  if (max_lags < 1 || max_lags > 24) bad("max_lags must lie in [1, 24]");
  if (!(hp_lambda >= 0.0) || !std::isfinite(hp_lambda)) bad("hp_lambda must be finite and >= 0");
  if (irf_horizon < 12) bad("irf_horizon must be >= 12");
  if (portmanteau_h < 1) bad("portmanteau_h must be >= 1");
  if (arch_q < 1) bad("arch_q must be >= 1");
  if (threads < 0) bad("threads must be >= 0");
  if (trend_window && !(trend_window->first < trend_window->second)) bad("trend window must be increasing");
}

void PipelineConfig::apply_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_config, "config must be a flat JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "panel") panel_path = value.get<std::string>();
      else if (key == "weights") weights_path = value.get<std::string>();
      else if (key == "base_year") base_year = value.get<int>();
      else if (key == "alpha") alpha = value.get<double>();
      else if (key == "max_lags") max_lags = value.get<int>();
      else if (key == "hp_lambda") hp_lambda = value.get<double>();
      else if (key == "irf_horizon") irf_horizon = value.get<int>();
      else if (key == "output_dir") output_dir = value.get<std::string>();
      else if (key == "seed") seed = value.get<std::uint64_t>();
      else if (key == "seasonal_adjust") seasonal_adjust = value.get<bool>();
      else if (key == "portmanteau_h") portmanteau_h = value.get<int>();
      else if (key == "arch_q") arch_q = value.get<int>();
      else if (key == "threads") threads = value.get<int>();
      else if (key == "snapshot_dates") {
        if (value.is_string()) snapshot_dates = parse_date_list(value.get<std::string>());
        else {
          snapshot_dates.clear();
          for (const auto& d : value) snapshot_dates.push_back(YearMonth::parse(d.get<std::string>()));
        }
      } else if (key == "trend_window") {
        auto dates = parse_date_list(value.get<std::string>());
        if (dates.size() != 2) throw Error(ErrorCode::invalid_config, "trend_window needs two dates");
        trend_window = std::make_pair(dates[0], dates[1]);
      } else if (key == "dummies" || key == "dummy") {
        dummies.clear();
        if (value.is_string()) dummies.push_back(parse_dummy(value.get<std::string>()));
        else for (const auto& d : value) dummies.push_back(parse_dummy(d.get<std::string>()));
      } else {
        throw Error(ErrorCode::invalid_config, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_config) throw;
    throw Error(ErrorCode::invalid_config, e.detail());
  }
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  c.apply_json(j);
  return c;
}

// ---------------------------------------------------------------------------
// Per-country estimation

CountryInputs prepare_country(const Panel& panel, const std::string& country, const PipelineConfig& config) {
  CountryInputs in;
  in.country = country;
  for (Variable v : {Variable::activity, Variable::price}) {
    const auto i = static_cast<std::size_t>(v);
    DatedSeries level = log_levels(rebase(panel.series(country, v), config.base_year));
    if (config.seasonal_adjust) level = seasonal_adjust_dummies(level);
    DatedSeries growth = difference(level);
    in.log_levels[i] = level;
    in.growth[i] = TransformedSeries{country, v, std::move(growth.dates), std::move(growth.values)};
  }
  for (const auto& d : config.dummies) {
    if (d.country == country) in.dummies.push_back(d.spec);
  }
  return in;
}

VarModel fit_country_var(const CountryInputs& inputs, const PipelineConfig& config, LagSelection* lags) {
  const VarData data = VarData::from(inputs.growth[0], inputs.growth[1]);
  LagSelectionOptions opt;
  opt.max_p = config.max_lags;
  opt.portmanteau_h = config.portmanteau_h;
  opt.arch_q = config.arch_q;
  opt.alpha = 0.05;
  opt.dummies = inputs.dummies;
  LagSelection sel = select_lag(data, opt);
  VarModel model = fit_var(data, sel.p, inputs.dummies);
  if (lags) *lags = std::move(sel);
  return model;
}

CountryEstimate estimate_country(const Panel& panel, const std::string& country, const PipelineConfig& config) {
  std::string stage = "transform";
  try {
    CountryEstimate est;
    est.inputs = prepare_country(panel, country, config);

    stage = "adf";
    for (int v = 0; v < 2; ++v) {
      const auto& level = est.inputs.log_levels[static_cast<std::size_t>(v)].values;
      const auto& diff = est.inputs.growth[static_cast<std::size_t>(v)].values;
      auto& row = est.adf[static_cast<std::size_t>(v)];
      row.level = adf_test(level, AdfSpec::trend, config.max_lags);
      row.first_diff = adf_test(diff, AdfSpec::trend, config.max_lags);
      row.order = integration_order(level, AdfSpec::trend, 2, config.max_lags).order;
    }

    stage = "var";
    est.model = fit_country_var(est.inputs, config, &est.lags);
    est.stability = stability(est.model);
    est.portmanteau_h = gate_portmanteau_h(config.portmanteau_h, est.model.p);
    est.portmanteau = portmanteau_test(est.model, est.portmanteau_h);
    for (int eq = 0; eq < 2; ++eq) {
      const Eigen::VectorXd col = est.model.residuals.col(eq);
      est.arch[static_cast<std::size_t>(eq)] =
          arch_lm_test(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), config.arch_q);
    }

    stage = "johansen";
    est.johansen = johansen_test(est.inputs.log_levels[0].values, est.inputs.log_levels[1].values, est.model.p + 1);

    stage = "identify";
    est.structural = identify_bq(est.model);
    est.irf = irf_structural(est.structural, est.model, config.irf_horizon);
    est.size_speed = size_and_speed(est.irf);
    return est;
  } catch (const Error& e) {
    throw e.in(country + "/" + stage);
  }
}

std::vector<CountryEstimate> estimate_all(const Panel& panel, const PipelineConfig& config) {
  const auto& countries = panel.countries();
  const std::size_t n = countries.size();
  std::vector<std::optional<CountryEstimate>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::size_t workers = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = estimate_country(panel, countries[i], config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  std::vector<CountryEstimate> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

ShockPanel shock_panel(const std::vector<CountryEstimate>& estimates, Shock kind) {
  std::vector<CountrySeries> series;
  for (const auto& e : estimates) {
    CountrySeries s;
    s.country = e.inputs.country;
    s.dates = e.structural.dates;
    const Eigen::VectorXd col = e.structural.shocks.col(static_cast<Eigen::Index>(kind));
    s.values.assign(col.data(), col.data() + col.size());
    series.push_back(std::move(s));
  }
  return align_common(series, kind);
}

// ---------------------------------------------------------------------------
// Report helpers

std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

std::string format3(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // No negative zero in tables.
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

namespace {

std::string full(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string adf_stars(const AdfResult& r) {
  if (!r.reject_at) return "";
  if (*r.reject_at <= 0.01) return "***";
  if (*r.reject_at <= 0.05) return "**";
  return "*";
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json to_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json to_json(const Calendar& dates) {
  json a = json::array();
  for (const auto& d : dates) a.push_back(d.str());
  return a;
}

json to_json(const TestResult& t) { return {{"statistic", num(t.statistic)}, {"df", num(t.df)}, {"p_value", num(t.p_value)}}; }

json to_json(const AdfResult& r) {
  return {{"statistic", num(r.statistic)},
          {"lags_used", r.lags_used},
          {"nobs", r.nobs},
          {"spec", std::string(to_string(r.spec))},
          {"critical_values", {{"1%", r.critical_values[0]}, {"5%", r.critical_values[1]}, {"10%", r.critical_values[2]}}},
          {"reject_at", r.reject_at ? json(*r.reject_at) : json(nullptr)}};
}

json to_json(const JohansenResult& j) {
  return {{"nobs", j.nobs},
          {"lag_order", j.lag_order},
          {"eigenvalues", to_json(std::span<const double>(j.eigenvalues))},
          {"trace_stats", to_json(std::span<const double>(j.trace_stats))},
          {"max_eig_stats", to_json(std::span<const double>(j.max_eig_stats))},
          {"critical_values_trace", to_json(std::span<const double>(j.critical_values_trace))},
          {"critical_values_maxeig", to_json(std::span<const double>(j.critical_values_maxeig))},
          {"selected_rank", j.selected_rank}};
}

json to_json(const CountryEstimate& e) {
  json adf;
  for (Variable v : {Variable::activity, Variable::price}) {
    const auto& row = e.adf[static_cast<std::size_t>(v)];
    adf[std::string(variable_name(v))] = {{"level", to_json(row.level)}, {"first_diff", to_json(row.first_diff)}, {"order", row.order}};
  }
  json lag_mats = json::array();
  for (const auto& b : e.model.lag_matrices) lag_mats.push_back(to_json(Eigen::MatrixXd(b)));
  json trail = json::array();
  for (const auto& s : e.lags.trail) {
    trail.push_back({{"p", s.p},
                     {"stable", s.stable},
                     {"max_modulus", num(s.max_modulus)},
                     {"portmanteau_h", s.portmanteau_h},
                     {"portmanteau", to_json(s.portmanteau)},
                     {"arch_activity", to_json(s.arch[0])},
                     {"arch_price", to_json(s.arch[1])},
                     {"passed", s.passed}});
  }
  json dummies = json::array();
  for (const auto& d : e.model.dummies) {
    dummies.push_back(format_dummy({e.inputs.country, d}));
  }
  json var = {{"p", e.model.p},
              {"nobs", e.model.nobs()},
              {"effective_start", e.model.effective_dates.front().str()},
              {"effective_end", e.model.effective_dates.back().str()},
              {"criteria_choice", {{"aic", e.lags.aic_p}, {"sc", e.lags.sc_p}, {"hq", e.lags.hq_p}}},
              {"criteria_values", {{"aic", to_json(e.lags.aic)}, {"sc", to_json(e.lags.sc)}, {"hq", to_json(e.lags.hq)}}},
              {"gate_trail", trail},
              {"intercept", to_json(Eigen::MatrixXd(e.model.intercept))},
              {"lag_matrices", lag_mats},
              {"dummies", dummies},
              {"exog_coefficients", to_json(e.model.exog_coefficients)},
              {"sigma", to_json(Eigen::MatrixXd(e.model.sigma))},
              {"stability", {{"moduli", to_json(e.stability.moduli)}, {"stable", e.stability.stable}}},
              {"portmanteau", {{"h", e.portmanteau_h}, {"statistic", num(e.portmanteau.statistic)}, {"df", num(e.portmanteau.df)}, {"p_value", num(e.portmanteau.p_value)}}},
              {"arch", {{"q", e.arch[0].df}, {"activity", to_json(e.arch[0])}, {"price", to_json(e.arch[1])}}}};
  json irf = {{"horizon", e.irf.horizon}};
  for (Shock s : {Shock::supply, Shock::demand}) {
    for (Variable v : {Variable::activity, Variable::price}) {
      irf[std::string(to_string(s)) + "_to_" + std::string(variable_name(v))] = to_json(e.irf.response(s, v));
    }
  }
  json svar = {{"a0", to_json(Eigen::MatrixXd(e.structural.a0))},
               {"long_run", to_json(Eigen::MatrixXd(e.structural.long_run))},
               {"shock_start", e.structural.dates.front().str()},
               {"shock_end", e.structural.dates.back().str()}};
  json ss = {{"supply_size", num(e.size_speed.supply_size)},
             {"supply_speed", num(e.size_speed.supply_speed)},
             {"demand_size", num(e.size_speed.demand_size)},
             {"demand_speed", num(e.size_speed.demand_speed)},
             {"supply_long_run", num(e.size_speed.supply_long_run)},
             {"demand_long_run", num(e.size_speed.demand_long_run)}};
  return {{"country", e.inputs.country}, {"adf", adf}, {"var", var}, {"johansen", to_json(e.johansen)},
          {"svar", svar}, {"irf", irf}, {"size_speed", ss}};
}

json metadata(const PipelineConfig& c) {
  return {
      {"transform_order", "rebase to base-year mean 100 -> natural log -> optional seasonal dummies -> first difference"},
      {"seasonal_adjustment", c.seasonal_adjust ? "OLS month dummies with trend (opt-in)" : "none; inputs assumed adjusted"},
      {"adf", "constant and linear trend; AIC lag choice over 0..max_lags on a common sample; MacKinnon (2010) response-surface critical values"},
      {"johansen", "unrestricted constant, trend restricted to the cointegrating relation; VECM lag order = VAR lag + 1; 5% critical values 25.32/12.25 (trace), 18.96/12.25 (max-eig); reject iff statistic > critical value"},
      {"var", "equation-by-equation OLS with intercept; sigma divisor T - p"},
      {"lag_selection", "start at min(AIC, SC, HQ) on a common sample; increment until stable and portmanteau / ARCH-LM do not reject at 5%"},
      {"portmanteau", "adjusted multivariate portmanteau, h = max(h, p + 4), df = 4 (h - p)"},
      {"arch", "per-equation ARCH-LM with q own lags of squared residuals"},
      {"dummy_default", "step dummy from the break date onward, entering both equations"},
      {"identification", "long-run restriction via Cholesky of D1 Sigma D1'; positive long-run own effects; shock order (supply, demand)"},
      {"size_speed", "sizes are absolute long-run effects from D1 A0; speed = 12-month cumulative response / long-run"},
      {"correlation", "Pearson on the common shock calendar, two-sided Student-t(n - 2) p-values"},
      {"symmetry", "pair symmetric iff r > 0 and p < alpha; groups are maximal cliques of size >= 3"},
      {"weights", "annual weights applied to every month of the year, renormalized over the included countries"},
      {"cost_of_inclusion", "(S_{G-i} - S_G) / S_G; positive means the country's inclusion lowers dispersion"},
      {"hp_filter", "penalized second differences, banded LDL' solve"},
  };
}

template <typename Row>
void append_line(std::ostringstream& out, const Row& cells, std::size_t width = 11) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::string cell = cells[i];
    if (cell.size() < width) cell.append(width - cell.size(), ' ');
    out << cell;
  }
  out << '\n';
}

}  // namespace

ReportBundle run_pipeline(const PipelineConfig& config) {
  config.validate();
  const Panel panel = load_panel_file(config.panel_path);
  const WeightTable weights = load_weights_file(config.weights_path);
  for (const auto& d : config.dummies) {
    panel.country_index(d.country);
  }

  const std::vector<CountryEstimate> estimates = estimate_all(panel, config);
  const auto& countries = panel.countries();

  ReportBundle bundle;
  json report;
  report["metadata"] = metadata(config);
  json cfg = {{"panel", std::filesystem::path(config.panel_path).filename().string()},
              {"weights", std::filesystem::path(config.weights_path).filename().string()},
              {"base_year", config.base_year},
              {"alpha", config.alpha},
              {"max_lags", config.max_lags},
              {"hp_lambda", config.hp_lambda},
              {"irf_horizon", config.irf_horizon},
              {"seed", config.seed},
              {"seasonal_adjust", config.seasonal_adjust},
              {"portmanteau_h", config.portmanteau_h},
              {"arch_q", config.arch_q}};
  json snaps = json::array();
  for (const auto& d : config.snapshot_dates) snaps.push_back(d.str());
  cfg["snapshot_dates"] = snaps;
  json dummies = json::array();
  for (const auto& d : config.dummies) dummies.push_back(format_dummy(d));
  cfg["dummies"] = dummies;
  report["config"] = cfg;
  report["panel"] = {{"countries", countries}, {"start", panel.dates().front().str()},
                     {"end", panel.dates().back().str()}, {"months", panel.size()}};

  json per_country = json::array();
  for (const auto& e : estimates) per_country.push_back(to_json(e));
  report["countries"] = per_country;

  std::ostringstream tables;
  std::ostringstream adf_csv, joh_csv, var_csv, shocks_csv, size_csv;

  // Unit roots.
  tables << "Augmented Dickey-Fuller unit root test (log levels; constant and linear trend)\n";
  append_line(tables, std::vector<std::string>{"Country", "MEAI lvl", "MEAI diff", "Concl.", "CPI lvl", "CPI diff", "Concl."});
  adf_csv << "country,variable,level_statistic,level_lags,level_reject_at,diff_statistic,diff_lags,diff_reject_at,order\n";
  for (const auto& e : estimates) {
    std::vector<std::string> row = {e.inputs.country};
    for (Variable v : {Variable::activity, Variable::price}) {
      const auto& a = e.adf[static_cast<std::size_t>(v)];
      row.push_back(format3(a.level.statistic) + adf_stars(a.level));
      row.push_back(format3(a.first_diff.statistic) + adf_stars(a.first_diff));
      row.push_back("I(" + std::to_string(a.order) + ")");
      adf_csv << e.inputs.country << ',' << panel_code(v) << ',' << full(a.level.statistic) << ',' << a.level.lags_used << ','
              << (a.level.reject_at ? full(*a.level.reject_at) : "") << ',' << full(a.first_diff.statistic) << ','
              << a.first_diff.lags_used << ',' << (a.first_diff.reject_at ? full(*a.first_diff.reject_at) : "") << ','
              << a.order << '\n';
    }
    append_line(tables, row);
  }
  tables << "*, **, *** denote rejection of the unit-root null at the 10%, 5% and 1% levels.\n\n";

  // Cointegration.
  tables << "Johansen cointegration test (5% critical values)\n";
  append_line(tables, std::vector<std::string>{"Country", "H0", "Trace", "CV", "Max-eig", "CV"});
  joh_csv << "country,hypothesis,eigenvalue,trace_statistic,trace_cv,max_eig_statistic,max_eig_cv,selected_rank\n";
  for (const auto& e : estimates) {
    for (int r = 0; r < 2; ++r) {
      const auto ri = static_cast<std::size_t>(r);
      append_line(tables, std::vector<std::string>{r == 0 ? e.inputs.country : "", r == 0 ? "r = 0" : "r <= 1",
                                                   format3(e.johansen.trace_stats[ri]), format3(e.johansen.critical_values_trace[ri]),
                                                   format3(e.johansen.max_eig_stats[ri]), format3(e.johansen.critical_values_maxeig[ri])});
      joh_csv << e.inputs.country << ',' << (r == 0 ? "r=0" : "r<=1") << ',' << full(e.johansen.eigenvalues[ri]) << ','
              << full(e.johansen.trace_stats[ri]) << ',' << full(e.johansen.critical_values_trace[ri]) << ','
              << full(e.johansen.max_eig_stats[ri]) << ',' << full(e.johansen.critical_values_maxeig[ri]) << ','
              << e.johansen.selected_rank << '\n';
    }
  }
  tables << '\n';

  // VAR summaries.
  tables << "Reduced-form VAR summary\n";
  append_line(tables, std::vector<std::string>{"Country", "p", "AIC/SC/HQ", "Max mod.", "Stable", "Q p-val", "ARCH-y p", "ARCH-pi p"});
  var_csv << "country,p,aic_p,sc_p,hq_p,max_modulus,stable,portmanteau_h,portmanteau_statistic,portmanteau_p,arch_q,"
             "arch_activity_p,arch_price_p\n";
  for (const auto& e : estimates) {
    append_line(tables, std::vector<std::string>{e.inputs.country, std::to_string(e.model.p),
                                                 std::to_string(e.lags.aic_p) + "/" + std::to_string(e.lags.sc_p) + "/" + std::to_string(e.lags.hq_p),
                                                 format3(e.stability.max_modulus()), e.stability.stable ? "yes" : "no",
                                                 format3(e.portmanteau.p_value), format3(e.arch[0].p_value), format3(e.arch[1].p_value)});
    var_csv << e.inputs.country << ',' << e.model.p << ',' << e.lags.aic_p << ',' << e.lags.sc_p << ',' << e.lags.hq_p << ','
            << full(e.stability.max_modulus()) << ',' << (e.stability.stable ? "true" : "false") << ',' << e.portmanteau_h << ','
            << full(e.portmanteau.statistic) << ',' << full(e.portmanteau.p_value) << ',' << config.arch_q << ','
            << full(e.arch[0].p_value) << ',' << full(e.arch[1].p_value) << '\n';
  }
  tables << '\n';

  shocks_csv << "country,date,supply_shock,demand_shock\n";
  for (const auto& e : estimates) write_shock_rows(shocks_csv, e.inputs.country, e.structural);

  // Correlations and symmetric groups.
  json group;
  std::array<ShockPanel, 2> shock_panels = {shock_panel(estimates, Shock::supply), shock_panel(estimates, Shock::demand)};
  for (Shock kind : {Shock::supply, Shock::demand}) {
    const auto& sp = shock_panels[static_cast<std::size_t>(kind)];
    const std::string name(to_string(kind));
    CorrelationReport corr;
    SymmetryReport sym;
    try {
      corr = correlation_matrix(sp);
      sym = classify_symmetry(corr, config.alpha);
    } catch (const Error& e) {
      throw e.in("group/correlation-" + name);
    }
    group["correlation"][name] = {{"countries", corr.countries}, {"n", corr.n}, {"start", sp.dates.front().str()},
                                  {"end", sp.dates.back().str()}, {"r", to_json(corr.r)}, {"p", to_json(corr.p)}};
    json groups = json::array();
    for (const auto& g : sym.groups) groups.push_back(g);
    group["symmetric_groups"][name] = groups;

    tables << "Correlation matrix of " << name << " shocks, " << sp.dates.front().str() << " to " << sp.dates.back().str()
           << " (n = " << corr.n << ")\n";
    std::vector<std::string> head = {"Country"};
    for (const auto& c : corr.countries) head.push_back(c);
    append_line(tables, head);
    std::ostringstream corr_csv;
    corr_csv << "country_a,country_b,r,p_value,stars,symmetric\n";
    for (std::size_t i = 0; i < corr.countries.size(); ++i) {
      std::vector<std::string> row = {corr.countries[i]};
      for (std::size_t j = 0; j <= i; ++j) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        row.push_back(format3(corr.r(ii, jj)) + (i == j ? "" : significance_stars(corr.p(ii, jj))));
        if (j < i) {
          corr_csv << corr.countries[i] << ',' << corr.countries[j] << ',' << full(corr.r(ii, jj)) << ','
                   << full(corr.p(ii, jj)) << ',' << significance_stars(corr.p(ii, jj)) << ','
                   << (sym.symmetric[i][j] ? "true" : "false") << '\n';
        }
      }
      append_line(tables, row);
    }
    tables << "*, **, *** denote significance at the 10%, 5% and 1% levels.\n";
    tables << "Symmetric groups (alpha = " << config.alpha << "): ";
    if (sym.groups.empty()) tables << "none";
    for (std::size_t g = 0; g < sym.groups.size(); ++g) {
      tables << (g ? "; " : "") << '{';
      for (std::size_t k = 0; k < sym.groups[g].size(); ++k) tables << (k ? ", " : "") << sym.groups[g][k];
      tables << '}';
    }
    tables << "\n\n";
    bundle.files["correlation_" + name + ".csv"] = corr_csv.str();
  }

  // Size and speed.
  tables << "Size of shocks and speed of adjustment\n";
  append_line(tables, std::vector<std::string>{"Country", "S size", "S speed", "D size", "D speed"});
  size_csv << "country,supply_size,supply_speed,demand_size,demand_speed,supply_long_run,demand_long_run\n";
  std::array<double, 4> sums{};
  for (const auto& e : estimates) {
    const auto& s = e.size_speed;
    append_line(tables, std::vector<std::string>{e.inputs.country, format3(s.supply_size), format3(s.supply_speed),
                                                 format3(s.demand_size), format3(s.demand_speed)});
    size_csv << e.inputs.country << ',' << full(s.supply_size) << ',' << full(s.supply_speed) << ',' << full(s.demand_size)
             << ',' << full(s.demand_speed) << ',' << full(s.supply_long_run) << ',' << full(s.demand_long_run) << '\n';
    sums[0] += s.supply_size;
    sums[1] += s.supply_speed;
    sums[2] += s.demand_size;
    sums[3] += s.demand_speed;
  }
  const double nc = static_cast<double>(estimates.size());
  for (double& v : sums) v /= nc;
  append_line(tables, std::vector<std::string>{"Average", format3(sums[0]), format3(sums[1]), format3(sums[2]), format3(sums[3])});
  tables << '\n';
  group["size_speed_average"] = {{"supply_size", sums[0]}, {"supply_speed", sums[1]}, {"demand_size", sums[2]}, {"demand_speed", sums[3]}};

  // Dispersion, trends and cost of inclusion.
  std::array<DispersionSeries, 2> disp;
  std::array<HpResult, 2> hp;
  std::array<std::vector<CostSeries>, 2> costs;
  for (Shock kind : {Shock::supply, Shock::demand}) {
    const auto k = static_cast<std::size_t>(kind);
    const std::string name(to_string(kind));
    try {
      disp[k] = dispersion_index(shock_panels[k], weights);
      hp[k] = hp_filter(disp[k].values, config.hp_lambda);
      for (const auto& c : countries) costs[k].push_back(cost_of_inclusion(shock_panels[k], weights, c));
    } catch (const Error& e) {
      throw e.in("group/dispersion-" + name);
    }
    YearMonth t0 = disp[k].dates.front(), t1 = disp[k].dates.back();
    if (config.trend_window) std::tie(t0, t1) = *config.trend_window;
    double change = 0.0;
    try {
      change = trend_change(disp[k].dates, hp[k].trend, t0, t1);
    } catch (const Error& e) {
      throw e.in("group/trend-change-" + name);
    }
    group["dispersion"][name] = {{"dates", to_json(disp[k].dates)}, {"values", to_json(disp[k].values)},
                                 {"trend", to_json(hp[k].trend)}};
    group["trend_change"][name] = {{"from", t0.str()}, {"to", t1.str()}, {"percent", num(change)}};
  }

  std::ostringstream disp_csv;
  disp_csv << "date,supply,supply_trend,supply_cycle,demand,demand_trend,demand_cycle\n";
  for (std::size_t t = 0; t < disp[0].dates.size(); ++t) {
    disp_csv << disp[0].dates[t].str();
    for (std::size_t k = 0; k < 2; ++k) {
      disp_csv << ',' << full(disp[k].values[t]) << ',' << full(hp[k].trend[t]) << ',' << full(hp[k].cycle[t]);
    }
    disp_csv << '\n';
  }
  tables << "Dispersion trend change (HP lambda = " << config.hp_lambda << ")\n";
  for (Shock kind : {Shock::supply, Shock::demand}) {
    const auto& tc = group["trend_change"][std::string(to_string(kind))];
    tables << "  " << to_string(kind) << ": " << tc["from"].get<std::string>() << " -> " << tc["to"].get<std::string>()
           << ": " << format3(tc["percent"].get<double>()) << "%\n";
  }
  tables << '\n';

  std::ostringstream cost_series_csv;
  cost_series_csv << "date,country,supply_cost,demand_cost\n";
  for (std::size_t t = 0; t < disp[0].dates.size(); ++t) {
    for (std::size_t c = 0; c < countries.size(); ++c) {
      cost_series_csv << disp[0].dates[t].str() << ',' << countries[c] << ',' << full(costs[0][c].values[t]) << ','
                      << full(costs[1][c].values[t]) << '\n';
    }
  }

  // Snapshot table.
  std::vector<long> snap_pos;
  for (const auto& d : config.snapshot_dates) {
    const long pos = calendar_position(disp[0].dates, d);
    if (pos < 0) {
      throw Error(ErrorCode::date_out_of_range, "group/cost: snapshot date " + d.str() + " outside " +
                                                    disp[0].dates.front().str() + ".." + disp[0].dates.back().str());
    }
    snap_pos.push_back(pos);
  }
  tables << "Cost of inclusion\n";
  std::vector<std::string> head = {"Country"};
  for (Shock kind : {Shock::supply, Shock::demand}) {
    for (const auto& d : config.snapshot_dates) {
      head.push_back(std::string(kind == Shock::supply ? "S " : "D ") + std::to_string(d.year) + "M" + std::to_string(d.month));
    }
  }
  append_line(tables, head);
  std::ostringstream cost_csv;
  cost_csv << "country,kind";
  for (const auto& d : config.snapshot_dates) cost_csv << ',' << d.str();
  cost_csv << '\n';
  json cost_json;
  std::vector<double> averages(2 * snap_pos.size(), 0.0);
  for (std::size_t c = 0; c < countries.size(); ++c) {
    std::vector<std::string> row = {countries[c]};
    for (std::size_t k = 0; k < 2; ++k) {
      const std::string name(to_string(static_cast<Shock>(k)));
      cost_csv << countries[c] << ',' << name;
      json vals = json::array();
      for (std::size_t s = 0; s < snap_pos.size(); ++s) {
        const double v = costs[k][c].values[static_cast<std::size_t>(snap_pos[s])];
        row.push_back(format3(v));
        cost_csv << ',' << full(v);
        vals.push_back(num(v));
        averages[k * snap_pos.size() + s] += v / static_cast<double>(countries.size());
      }
      cost_csv << '\n';
      cost_json[name][countries[c]] = vals;
    }
    append_line(tables, row);
  }
  std::vector<std::string> avg_row = {"Average"};
  for (double v : averages) avg_row.push_back(format3(v));
  append_line(tables, avg_row);
  group["cost_snapshots"] = {{"dates", snaps}, {"values", cost_json},
                             {"average", {{"supply", to_json(std::span<const double>(averages.data(), snap_pos.size()))},
                                          {"demand", to_json(std::span<const double>(averages.data() + snap_pos.size(), snap_pos.size()))}}}};
  report["group"] = group;

  bundle.files["tables.txt"] = tables.str();
  bundle.files["adf.csv"] = adf_csv.str();
  bundle.files["johansen.csv"] = joh_csv.str();
  bundle.files["var_summary.csv"] = var_csv.str();
  bundle.files["shocks.csv"] = shocks_csv.str();
  bundle.files["size_speed.csv"] = size_csv.str();
  bundle.files["dispersion.csv"] = disp_csv.str();
  bundle.files["cost_series.csv"] = cost_series_csv.str();
  bundle.files["cost_table.csv"] = cost_csv.str();
  bundle.files["report.json"] = report.dump(2) + "\n";
  bundle.report = std::move(report);
  return bundle;
}

void write_bundle(const ReportBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const bool existed = fs::exists(dir, ec);
  if (!existed && !fs::create_directories(dir, ec)) {
    throw Error(ErrorCode::io_error, "cannot create output directory '" + dir + "'");
  }
  std::vector<fs::path> written;
  try {
    for (const auto& [name, content] : bundle.files) {
      const fs::path path = fs::path(dir) / name;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
      written.push_back(path);
      out << content;
      out.close();
      if (!out) throw Error(ErrorCode::io_error, "failed writing '" + path.string() + "'");
    }
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    if (!existed) fs::remove(dir, ec);
    throw;
  }
}

}  // namespace oca
