#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "oca/pipeline.hpp"

using namespace oca;
namespace fs = std::filesystem;

namespace {

PipelineConfig fixture_config() {
  PipelineConfig c;
  c.panel_path = OCA_DATA_DIR "/fixture_panel.csv";
  c.weights_path = OCA_DATA_DIR "/weights.csv";
  c.output_dir = (fs::temp_directory_path() / "oca_pipeline_test").string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Splits a whitespace-aligned table line into cells.
std::vector<std::string> cells(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string c; in >> c;) out.push_back(c);
  return out;
}

std::string line_starting(const std::string& text, const std::string& after, const std::string& prefix) {
  auto pos = text.find(after);
  REQUIRE(pos != std::string::npos);
  std::istringstream in(text.substr(pos));
  for (std::string line; std::getline(in, line);)
    if (line.rfind(prefix, 0) == 0) return line;
  FAIL("no line starting with " << prefix);
  return {};
}

const ReportBundle& fixture_bundle() {
  static const ReportBundle b = run_pipeline(fixture_config());
  return b;
}

}  // namespace

TEST_CASE("dummy and date list parsing") {
  const auto d = parse_dummy("NIC:MEAI:2018-04:pulse");
  CHECK(d.country == "NIC");
  CHECK(d.spec.variable == Variable::activity);
  CHECK(d.spec.break_date == YearMonth{2018, 4});
  CHECK(d.spec.form == DummySpec::Form::pulse);
  CHECK(format_dummy(d) == "NIC:MEAI:2018-04:pulse");
  CHECK(format_dummy(parse_dummy("CRI:CPI:2020-03:step:own")) == "CRI:CPI:2020-03:step:own");
  CHECK_ERROR_CODE(parse_dummy("NIC:MEAI:2018-04"), ErrorCode::invalid_config);
  CHECK_ERROR_CODE(parse_dummy("NIC:GDP:2018-04:step"), ErrorCode::invalid_config);
  CHECK_ERROR_CODE(parse_dummy("NIC:MEAI:2018-04:ramp"), ErrorCode::invalid_config);
  const auto dates = parse_date_list("2010-01, 2015-01,2020-01");
  REQUIRE(dates.size() == 3);
  CHECK(dates[1] == YearMonth{2015, 1});
}

TEST_CASE("configuration validation and JSON keys") {
  PipelineConfig c = fixture_config();
  CHECK_NOTHROW(c.validate());
  c.alpha = 1.5;
  CHECK_ERROR_CODE(c.validate(), ErrorCode::invalid_config);
  c = fixture_config();
  c.max_lags = 25;
  CHECK_ERROR_CODE(c.validate(), ErrorCode::invalid_config);
  c = fixture_config();
  c.panel_path.clear();
  CHECK_ERROR_CODE(c.validate(), ErrorCode::invalid_config);

  c = fixture_config();
  c.apply_json(nlohmann::json::parse(R"({"alpha": 0.1, "max_lags": 8, "snapshot_dates": "2011-01,2012-06",
                                          "dummy": ["NIC:MEAI:2018-04:step"], "seasonal_adjust": true})"));
  CHECK(c.alpha == 0.1);
  CHECK(c.max_lags == 8);
  CHECK(c.snapshot_dates.size() == 2);
  CHECK(c.dummies.size() == 1);
  CHECK(c.seasonal_adjust);
  CHECK_ERROR_CODE(c.apply_json(nlohmann::json::parse(R"({"alpah": 0.1})")), ErrorCode::invalid_config);
  CHECK_ERROR_CODE(c.apply_json(nlohmann::json::parse(R"({"alpha": "high"})")), ErrorCode::invalid_config);
  CHECK_ERROR_CODE(c.apply_json(nlohmann::json::parse("[1, 2]")), ErrorCode::invalid_config);
}

TEST_CASE("fixture run produces the full bundle") {
  const auto& b = fixture_bundle();
  for (const char* name : {"tables.txt", "report.json", "adf.csv", "johansen.csv", "var_summary.csv", "shocks.csv",
                           "correlation_supply.csv", "correlation_demand.csv", "size_speed.csv", "dispersion.csv",
                           "cost_series.csv", "cost_table.csv"}) {
    CHECK_MESSAGE(b.files.count(name) == 1, name);
  }
  const auto& r = b.report;
  CHECK(r["countries"].size() == 7);
  CHECK(r["panel"]["months"] == 133);
  CHECK(r["group"]["correlation"]["supply"]["n"].get<std::size_t>() > 100);
  CHECK(r.contains("metadata"));
  for (const auto& c : r["countries"]) {
    CHECK(c["var"]["stability"]["stable"].get<bool>());
    CHECK(c["johansen"]["trace_stats"].size() == 2);
  }
}

TEST_CASE("cost table has one column per snapshot date and shock kind") {
  const auto& b = fixture_bundle();
  const auto& t = b.files.at("tables.txt");
  const auto head = cells(line_starting(t, "Cost of inclusion", "Country"));
  const std::vector<std::string> expected = {"Country", "S", "2010M1", "S", "2015M1", "S", "2020M1",
                                             "D", "2010M1", "D", "2015M1", "D", "2020M1"};
  CHECK(head == expected);
  const auto& snaps = b.report["group"]["cost_snapshots"];
  CHECK(snaps["dates"] == nlohmann::json({"2010-01", "2015-01", "2020-01"}));
  CHECK(snaps["values"]["supply"]["NIC"].size() == 3);
  CHECK(b.files.at("cost_table.csv").rfind("country,kind,2010-01,2015-01,2020-01\n", 0) == 0);
}

TEST_CASE("table numbers equal the JSON values at three decimals") {
  const auto& b = fixture_bundle();
  const auto& t = b.files.at("tables.txt");
  const auto& r = b.report;
  auto r3 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    return s == "-0.000" ? "0.000" : s;
  };
  for (const auto& c : r["countries"]) {
    const std::string code = c["country"];
    const auto row = cells(line_starting(t, "Size of shocks", code));
    REQUIRE(row.size() == 5);
    CHECK(row[1] == r3(c["size_speed"]["supply_size"]));
    CHECK(row[2] == r3(c["size_speed"]["supply_speed"]));
    CHECK(row[3] == r3(c["size_speed"]["demand_size"]));
    CHECK(row[4] == r3(c["size_speed"]["demand_speed"]));

    const auto cost = cells(line_starting(t, "Cost of inclusion", code));
    REQUIRE(cost.size() == 7);
    for (std::size_t s = 0; s < 3; ++s) {
      CHECK(cost[1 + s] == r3(r["group"]["cost_snapshots"]["values"]["supply"][code][s]));
      CHECK(cost[4 + s] == r3(r["group"]["cost_snapshots"]["values"]["demand"][code][s]));
    }
  }
  // Correlation cells, stars stripped.
  const auto& corr = r["group"]["correlation"]["demand"];
  const auto names = corr["countries"];
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto row = cells(line_starting(t, "Correlation matrix of demand", names[i].get<std::string>()));
    REQUIRE(row.size() == i + 2);
    for (std::size_t j = 0; j < i; ++j) {
      std::string cell = row[j + 1];
      const double p = corr["p"][i][j];
      CHECK(cell == r3(corr["r"][i][j]) + significance_stars(p));
    }
  }
}

TEST_CASE("significance stars and formatting") {
  CHECK(significance_stars(0.005) == "***");
  CHECK(significance_stars(0.01) == "**");
  CHECK(significance_stars(0.049) == "**");
  CHECK(significance_stars(0.05) == "*");
  CHECK(significance_stars(0.0999) == "*");
  CHECK(significance_stars(0.1) == "");
  CHECK(format3(0.33549) == "0.335");
  CHECK(format3(-0.0001) == "0.000");
  CHECK(format3(std::nan("")) == "NA");
  CHECK(format3(0.0625) == "0.062");  // exact tie rounds to even
}

TEST_CASE("determinism across runs and thread counts") {
  auto c1 = fixture_config(), c4 = fixture_config();
  c1.threads = 1;
  c4.threads = 4;
  const auto a = run_pipeline(c1), b = run_pipeline(c4);
  CHECK(a.files == b.files);
  CHECK(a.files.at("report.json") == fixture_bundle().files.at("report.json"));
}

TEST_CASE("bundle writing and cleanup") {
  const fs::path dir = fs::temp_directory_path() / "oca_pipeline_write";
  fs::remove_all(dir);
  write_bundle(fixture_bundle(), dir.string());
  CHECK(slurp(dir / "report.json") == fixture_bundle().files.at("report.json"));
  fs::remove_all(dir);

  // A file name that cannot be created makes the write fail midway.
  ReportBundle bad = fixture_bundle();
  bad.files["zz/missing/sub.csv"] = "x";
  CHECK_THROWS(write_bundle(bad, dir.string()));
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("errors name the failing stage") {
  auto c = fixture_config();
  c.snapshot_dates = {{2030, 1}};
  CHECK_ERROR_CODE(run_pipeline(c), ErrorCode::date_out_of_range);

  c = fixture_config();
  c.dummies = {parse_dummy("XXX:MEAI:2015-01:step")};
  CHECK_THROWS(run_pipeline(c));

  c = fixture_config();
  c.dummies = {parse_dummy("NIC:MEAI:2030-01:step")};
  try {
    (void)run_pipeline(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::date_out_of_range);
    CHECK(std::string(e.what()).find("NIC/var") != std::string::npos);
  }

  // A one-lag cap that no country passes names the first failing country and stage.
  c = fixture_config();
  c.max_lags = 1;
  c.arch_q = 1;
  try {
    (void)run_pipeline(c);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::no_admissible_lag);
    CHECK(std::string(e.what()).find("/var") != std::string::npos);
  }

  c = fixture_config();
  c.weights_path = OCA_DATA_DIR "/does_not_exist.csv";
  CHECK_THROWS(run_pipeline(c));
}

TEST_CASE("config file loading") {
  const fs::path p = fs::temp_directory_path() / "oca_pipeline_config.json";
  {
    std::ofstream out(p);
    out << R"({"panel": "a.csv", "weights": "w.csv", "output_dir": "out", "irf_horizon": 60, "trend_window": "2011-01,2019-12"})";
  }
  const auto c = load_config_file(p.string());
  CHECK(c.panel_path == "a.csv");
  CHECK(c.irf_horizon == 60);
  REQUIRE(c.trend_window);
  CHECK(c.trend_window->second == YearMonth{2019, 12});
  fs::remove(p);
  CHECK_THROWS(load_config_file(p.string()));
}
