#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "oca/series_store.hpp"
#include "oca/stats.hpp"

using namespace oca;

namespace {

std::string panel_csv(const std::vector<std::string>& countries, YearMonth start, int months,
                      const std::string& skip_country = "", YearMonth skip = {}) {
  std::ostringstream out;
  out << "country,date,variable,value\n";
  for (const auto& c : countries) {
    for (int m = 0; m < months; ++m) {
      const YearMonth d = start.plus(m);
      if (c == skip_country && d == skip) continue;
      out << c << ',' << d.str() << ",MEAI," << 100.0 + m << '\n';
      out << c << ',' << d.str() << ",CPI," << 90.0 + 0.5 * m << '\n';
    }
  }
  return out.str();
}

DatedSeries series_of(std::vector<double> v, YearMonth start = {2009, 1}) {
  return {make_calendar(start, v.size()), std::move(v)};
}

}  // namespace

TEST_CASE("calendar arithmetic and parsing") {
  CHECK(YearMonth::parse("2015-06") == YearMonth{2015, 6});
  CHECK(YearMonth{2019, 12}.next() == YearMonth{2020, 1});
  CHECK(YearMonth{2020, 1}.plus(-13) == YearMonth{2018, 12});
  CHECK(YearMonth{2009, 3}.str() == "2009-03");
  CHECK_ERROR_CODE(YearMonth::parse("2015-13"), ErrorCode::parse_error);
  CHECK_ERROR_CODE(YearMonth::parse("2015/06"), ErrorCode::parse_error);
  const auto cal = make_calendar({2009, 1}, 133);
  CHECK(cal.back() == YearMonth{2020, 1});
  CHECK(calendar_position(cal, {2010, 1}) == 12);
  CHECK(calendar_position(cal, {2020, 2}) == -1);
}

TEST_CASE("panel loads 7 countries x 133 months") {
  const std::vector<std::string> cs = {"SLV", "CRI", "DOM", "GTM", "HND", "NIC", "PAN"};
  std::istringstream in(panel_csv(cs, {2009, 1}, 133));
  const Panel p = load_panel(in);
  CHECK(p.size() == 133);
  CHECK(p.countries().size() == 7);
  CHECK(p.countries().front() == "CRI");
  CHECK(p.dates().front() == YearMonth{2009, 1});
  CHECK(p.dates().back() == YearMonth{2020, 1});
  CHECK(p.values(p.country_index("GTM"), Variable::price)[2] == doctest::Approx(91.0));
}

TEST_CASE("single country with three months") {
  std::istringstream in(panel_csv({"CRI"}, {2012, 5}, 3));
  CHECK(load_panel(in).size() == 3);
}

TEST_CASE("panel validation errors") {
  SUBCASE("hole inside a series is a calendar gap naming the cell") {
    std::istringstream in(panel_csv({"CRI", "HND"}, {2014, 1}, 36, "HND", {2015, 6}));
    try {
      load_panel(in);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::gap_in_calendar);
      CHECK(std::string(e.what()).find("HND") != std::string::npos);
      CHECK(std::string(e.what()).find("2015-06") != std::string::npos);
    }
  }
  SUBCASE("series ending early is a missing cell") {
    std::string csv = panel_csv({"CRI"}, {2014, 1}, 12);
    csv += "DOM,2014-01,MEAI,1\nDOM,2014-01,CPI,1\n";
    std::istringstream in(csv);
    CHECK_ERROR_CODE(load_panel(in), ErrorCode::missing_cell);
  }
  SUBCASE("non-positive value") {
    std::istringstream in("country,date,variable,value\nCRI,2010-01,MEAI,0\nCRI,2010-01,CPI,1\n");
    CHECK_ERROR_CODE(load_panel(in), ErrorCode::non_positive_value);
  }
  SUBCASE("duplicate row") {
    std::istringstream in("country,date,variable,value\nCRI,2010-01,MEAI,1\nCRI,2010-01,MEAI,2\nCRI,2010-01,CPI,1\n");
    CHECK_ERROR_CODE(load_panel(in), ErrorCode::duplicate_row);
  }
  SUBCASE("unknown variable and bad header") {
    std::istringstream a("country,date,variable,value\nCRI,2010-01,GDP,1\n");
    CHECK_ERROR_CODE(load_panel(a), ErrorCode::parse_error);
    std::istringstream b("a,b,c,d\n");
    CHECK_ERROR_CODE(load_panel(b), ErrorCode::parse_error);
  }
}

TEST_CASE("panel write/load round trip is exact") {
  testing::Rng rng(3);
  std::ostringstream csv;
  csv << "country,date,variable,value\n";
  for (const char* c : {"AAA", "BBB"})
    for (int m = 0; m < 30; ++m)
      for (const char* v : {"MEAI", "CPI"}) csv << c << ',' << YearMonth{2011, 1}.plus(m).str() << ',' << v << ',' << std::exp(rng.normal()) << '\n';
  std::istringstream in(csv.str());
  const Panel a = load_panel(in);
  std::ostringstream out;
  write_panel(out, a);
  std::istringstream in2(out.str());
  const Panel b = load_panel(in2);
  for (std::size_t c = 0; c < 2; ++c)
    for (Variable v : {Variable::activity, Variable::price}) {
      const auto x = a.values(c, v), y = b.values(c, v);
      CHECK(std::equal(x.begin(), x.end(), y.begin()));
    }
}

TEST_CASE("rebase") {
  const auto constant = rebase(series_of(std::vector<double>(36, 50.0)), 2010);
  for (double v : constant.values) CHECK(v == doctest::Approx(100.0).epsilon(1e-14));

  // Base-year mean already 100: unchanged.
  std::vector<double> v(24, 100.0);
  v[12] = 80.0;
  v[13] = 120.0;
  const auto same = rebase(series_of(v), 2010);
  CHECK(same.values[12] == doctest::Approx(80.0));
  CHECK(same.values[13] == doctest::Approx(120.0));
  CHECK(same.values[0] == doctest::Approx(100.0));

  CHECK_ERROR_CODE(rebase(series_of(std::vector<double>(12, 1.0)), 2010), ErrorCode::base_year_absent);
}

TEST_CASE("log differences") {
  const auto flat = log_diff(series_of(std::vector<double>(10, 7.0)));
  CHECK(flat.size() == 9);
  for (double x : flat.values) CHECK(x == 0.0);

  const auto one = log_diff(series_of({100.0, 105.0}));
  REQUIRE(one.size() == 1);
  CHECK(one.values[0] == doctest::Approx(0.04879016416943205).epsilon(1e-15));
  CHECK(one.dates[0] == YearMonth{2009, 2});

  std::vector<double> geo = {3.0};
  for (int i = 0; i < 40; ++i) geo.push_back(geo.back() * 1.013);
  for (double x : log_diff(series_of(geo)).values) CHECK(x == doctest::Approx(std::log(1.013)).epsilon(1e-12));

  // Composition with log_levels and difference.
  const auto two = difference(log_levels(series_of(geo)));
  CHECK(two.values[5] == doctest::Approx(std::log(1.013)).epsilon(1e-12));
}

TEST_CASE("seasonal dummy adjustment") {
  const double pattern[12] = {0.3, -0.1, 0.2, 0.0, -0.4, 0.1, 0.25, -0.2, 0.05, 0.0, -0.15, -0.05};
  SUBCASE("pure month pattern plus constant becomes constant") {
    std::vector<double> x(60);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = 4.0 + pattern[t % 12];
    const auto out = seasonal_adjust_dummies(series_of(x));
    const double m = stats::mean(x);
    for (double v : out.values) CHECK(v == doctest::Approx(m).epsilon(1e-12));
  }
  SUBCASE("linear trend is preserved") {
    std::vector<double> x(48);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] = 1.0 + 0.01 * static_cast<double>(t);
    const auto out = seasonal_adjust_dummies(series_of(x));
    for (std::size_t t = 0; t < x.size(); ++t) CHECK(out.values[t] == doctest::Approx(x[t]).epsilon(1e-12));
  }
  SUBCASE("white noise: matches a direct OLS projection, mean preserved") {
    testing::Rng rng(11);
    const std::size_t n = 72;
    const auto x = rng.normals(n);
    // Oracle: full dummy-coded regression, solved with normal equations.
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 13);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) {
      const auto r = static_cast<Eigen::Index>(t);
      design(r, 0) = 1.0;
      design(r, 1) = static_cast<double>(t);
      if (t % 12 != 0) design(r, 1 + static_cast<Eigen::Index>(t % 12)) = 1.0;
      y(r) = x[t];
    }
    const Eigen::VectorXd beta = (design.transpose() * design).ldlt().solve(design.transpose() * y);
    Eigen::VectorXd seasonal = design.rightCols(11) * beta.tail(11);
    seasonal.array() -= seasonal.mean();
    const auto out = seasonal_adjust_dummies(series_of(x));
    for (std::size_t t = 0; t < n; ++t) {
      CHECK(out.values[t] == doctest::Approx(x[t] - seasonal(static_cast<Eigen::Index>(t))).epsilon(1e-9));
    }
    CHECK(std::abs(stats::mean(out.values) - stats::mean(x)) < 1e-12);
  }
  SUBCASE("too short") { CHECK_ERROR_CODE(seasonal_adjust_dummies(series_of(std::vector<double>(23, 1.0))), ErrorCode::too_short); }
}
