#include "oca/series_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "oca/error.hpp"
#include "oca/stats.hpp"

namespace oca {

std::string_view panel_code(Variable v) { return v == Variable::activity ? "MEAI" : "CPI"; }
std::string_view variable_name(Variable v) { return v == Variable::activity ? "activity" : "price"; }

Variable parse_variable(std::string_view text) {
  if (text == "MEAI" || text == "activity") return Variable::activity;
  if (text == "CPI" || text == "price") return Variable::price;
  throw Error(ErrorCode::parse_error, "unknown variable '" + std::string(text) + "'");
}

namespace {

std::string cell_name(std::string_view country, YearMonth date, Variable v) {
  return "(" + std::string(country) + ", " + date.str() + ", " + std::string(panel_code(v)) + ")";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

void require_length(const DatedSeries& s, std::size_t n, const char* what) {
  if (s.size() < n) {
    throw Error(ErrorCode::too_short, std::string(what) + ": need at least " + std::to_string(n) +
                                          " observations, got " + std::to_string(s.size()));
  }
}

}  // namespace

Panel::Panel(std::vector<std::string> countries, Calendar dates, std::vector<Pair> values)
    : countries_(std::move(countries)), dates_(std::move(dates)), values_(std::move(values)) {
  if (countries_.empty()) throw Error(ErrorCode::invalid_argument, "panel has no countries");
  if (values_.size() != countries_.size()) throw Error(ErrorCode::invalid_argument, "panel value/country count mismatch");
  if (!std::is_sorted(countries_.begin(), countries_.end()) ||
      std::adjacent_find(countries_.begin(), countries_.end()) != countries_.end()) {
    throw Error(ErrorCode::invalid_argument, "panel countries must be unique and sorted");
  }
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (dates_[i] <= dates_[i - 1]) throw Error(ErrorCode::duplicate_row, "date " + dates_[i].str() + " out of order");
    if (dates_[i] != dates_[i - 1].next()) throw Error(ErrorCode::gap_in_calendar, "gap after " + dates_[i - 1].str());
  }
  for (std::size_t c = 0; c < countries_.size(); ++c) {
    for (Variable v : {Variable::activity, Variable::price}) {
      const auto& col = values_[c][static_cast<int>(v)];
      if (col.size() != dates_.size()) {
        throw Error(ErrorCode::missing_cell, countries_[c] + " " + std::string(panel_code(v)) + " has wrong length");
      }
      for (std::size_t t = 0; t < col.size(); ++t) {
        if (!std::isfinite(col[t])) throw Error(ErrorCode::missing_cell, cell_name(countries_[c], dates_[t], v) + " not finite");
        if (!(col[t] > 0.0)) throw Error(ErrorCode::non_positive_value, cell_name(countries_[c], dates_[t], v));
      }
    }
  }
}

std::size_t Panel::country_index(std::string_view code) const {
  auto it = std::lower_bound(countries_.begin(), countries_.end(), code);
  if (it == countries_.end() || *it != code) {
    throw Error(ErrorCode::invalid_argument, "country '" + std::string(code) + "' not in panel");
  }
  return static_cast<std::size_t>(it - countries_.begin());
}

std::span<const double> Panel::values(std::size_t country, Variable v) const {
  return values_.at(country)[static_cast<int>(v)];
}

DatedSeries Panel::series(std::string_view country, Variable v) const {
  auto vals = values(country_index(country), v);
  return {dates_, std::vector<double>(vals.begin(), vals.end())};
}

Panel load_panel(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  // (country, variable) -> date -> value
  std::map<std::string, std::array<std::map<YearMonth, double>, 2>> cells;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (view.empty()) continue;
    auto fields = split_csv(view);
    if (!header_seen) {
      if (fields.size() != 4 || fields[0] != "country" || fields[1] != "date" || fields[2] != "variable" ||
          fields[3] != "value") {
        throw Error(ErrorCode::parse_error, "expected header 'country,date,variable,value'");
      }
      header_seen = true;
      continue;
    }
    const std::string where = " at line " + std::to_string(line_no);
    if (fields.size() != 4) throw Error(ErrorCode::parse_error, "expected 4 fields" + where);
    if (fields[0].empty()) throw Error(ErrorCode::parse_error, "empty country" + where);
    YearMonth date = YearMonth::parse(fields[1]);
    Variable var = parse_variable(fields[2]);
    auto value = parse_double(fields[3]);
    std::string country(fields[0]);
    if (!value || !std::isfinite(*value)) {
      throw Error(ErrorCode::parse_error, "bad value '" + std::string(fields[3]) + "' for " + cell_name(country, date, var));
    }
    if (!(*value > 0.0)) throw Error(ErrorCode::non_positive_value, cell_name(country, date, var) + where);
    auto& col = cells[country][static_cast<int>(var)];
    if (!col.emplace(date, *value).second) throw Error(ErrorCode::duplicate_row, cell_name(country, date, var) + where);
  }
  if (!header_seen) throw Error(ErrorCode::parse_error, "empty panel input");
  if (cells.empty()) throw Error(ErrorCode::missing_cell, "panel has no data rows");

  // Global range across every (country, variable).
  std::optional<YearMonth> first, last;
  for (const auto& [country, cols] : cells) {
    for (const auto& col : cols) {
      if (col.empty()) continue;
      if (!first || col.begin()->first < *first) first = col.begin()->first;
      if (!last || col.rbegin()->first > *last) last = col.rbegin()->first;
    }
  }
  Calendar dates = make_calendar(*first, static_cast<std::size_t>(last->index() - first->index() + 1));

  std::vector<std::string> countries;
  std::vector<Panel::Pair> values;
  for (const auto& [country, cols] : cells) {
    Panel::Pair pair;
    for (Variable v : {Variable::activity, Variable::price}) {
      const auto& col = cols[static_cast<int>(v)];
      if (col.empty()) throw Error(ErrorCode::missing_cell, cell_name(country, dates.front(), v) + ": variable absent");
      const YearMonth own_first = col.begin()->first, own_last = col.rbegin()->first;
      auto& out = pair[static_cast<int>(v)];
      out.reserve(dates.size());
      for (YearMonth d : dates) {
        auto it = col.find(d);
        if (it == col.end()) {
          // A hole inside the cell's own span is a calendar gap; a short span is a missing cell.
          ErrorCode code = (d > own_first && d < own_last) ? ErrorCode::gap_in_calendar : ErrorCode::missing_cell;
          throw Error(code, cell_name(country, d, v) + " not present");
        }
        out.push_back(it->second);
      }
    }
    countries.push_back(country);
    values.push_back(std::move(pair));
  }
  return Panel(std::move(countries), std::move(dates), std::move(values));
}

Panel load_panel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open panel '" + path + "'");
  return load_panel(in);
}

void write_panel(std::ostream& out, const Panel& panel) {
  out << "country,date,variable,value\n";
  char buf[64];
  for (std::size_t c = 0; c < panel.countries().size(); ++c) {
    for (std::size_t t = 0; t < panel.size(); ++t) {
      for (Variable v : {Variable::activity, Variable::price}) {
        std::snprintf(buf, sizeof buf, "%.17g", panel.values(c, v)[t]);
        out << panel.countries()[c] << ',' << panel.dates()[t].str() << ',' << panel_code(v) << ',' << buf << '\n';
      }
    }
  }
}

DatedSeries rebase(const DatedSeries& series, int base_year) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series.dates[t].year == base_year) {
      sum += series.values[t];
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::base_year_absent, "no observations in base year " + std::to_string(base_year));
  const double base = sum / static_cast<double>(n);
  if (!(base > 0.0)) throw Error(ErrorCode::non_positive_value, "base-year mean is not positive");
  DatedSeries out = series;
  for (double& v : out.values) v = 100.0 * v / base;
  return out;
}

DatedSeries log_levels(const DatedSeries& series) {
  DatedSeries out = series;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (!(out.values[t] > 0.0)) throw Error(ErrorCode::non_positive_value, "log of non-positive value at " + out.dates[t].str());
    out.values[t] = std::log(out.values[t]);
  }
  return out;
}

DatedSeries difference(const DatedSeries& series) {
  require_length(series, 2, "difference");
  DatedSeries out;
  out.dates.assign(series.dates.begin() + 1, series.dates.end());
  out.values.resize(series.size() - 1);
  for (std::size_t t = 1; t < series.size(); ++t) out.values[t - 1] = series.values[t] - series.values[t - 1];
  return out;
}

DatedSeries log_diff(const DatedSeries& series) {
  require_length(series, 2, "log_diff");
  return difference(log_levels(series));
}

DatedSeries seasonal_adjust_dummies(const DatedSeries& series) {
  require_length(series, 24, "seasonal_adjust_dummies");
  const auto n = static_cast<Eigen::Index>(series.size());
  // Columns: intercept, trend, then dummies for months 2..12 (January is the base).
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 13);
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& d = series.dates[static_cast<std::size_t>(t)];
    x(t, 0) = 1.0;
    x(t, 1) = static_cast<double>(t) / static_cast<double>(n);
    if (d.month > 1) x(t, d.month) = 1.0;
    y[t] = series.values[static_cast<std::size_t>(t)];
  }
  auto fit = stats::ols(x, y, ErrorCode::degenerate_regressor);
  Eigen::VectorXd seasonal = x.rightCols(11) * fit.beta.tail(11);
  Eigen::VectorXd adjusted = y - seasonal;
  adjusted.array() += y.mean() - adjusted.mean();
  DatedSeries out;
  out.dates = series.dates;
  out.values.assign(adjusted.data(), adjusted.data() + n);
  return out;
}

}  // namespace oca
