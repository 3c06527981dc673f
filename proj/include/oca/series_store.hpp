#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oca/calendar.hpp"

namespace oca {

enum class Variable { activity = 0, price = 1 };

// "MEAI"/"CPI" as used in the panel CSV.
std::string_view panel_code(Variable v);
std::string_view variable_name(Variable v);
// Accepts MEAI, CPI, activity, price (case-sensitive).
Variable parse_variable(std::string_view text);

// A monthly series on a contiguous calendar.
struct DatedSeries {
  Calendar dates;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

// Log-differenced (or otherwise transformed) series tagged with its origin.
struct TransformedSeries {
  std::string country;
  Variable variable = Variable::activity;
  Calendar dates;
  std::vector<double> values;
};

// Validated per-country pair of monthly index series on a shared calendar.
// Immutable once built; the constructor enforces every invariant.
class Panel {
 public:
  using Pair = std::array<std::vector<double>, 2>;

  Panel(std::vector<std::string> countries, Calendar dates, std::vector<Pair> values);

  const std::vector<std::string>& countries() const { return countries_; }
  const Calendar& dates() const { return dates_; }
  std::size_t size() const { return dates_.size(); }

  // Index of a country code; throws invalid_argument if absent.
  std::size_t country_index(std::string_view code) const;
  std::span<const double> values(std::size_t country, Variable v) const;
  DatedSeries series(std::string_view country, Variable v) const;

 private:
  std::vector<std::string> countries_;
  Calendar dates_;
  std::vector<Pair> values_;
};

// Long CSV with header `country,date,variable,value`. Row order is irrelevant.
Panel load_panel(std::istream& in);
Panel load_panel_file(const std::string& path);
// Writes the same format with round-trip (17 significant digit) values,
// ordered by country, date, then variable.
void write_panel(std::ostream& out, const Panel& panel);

// 100 * x / mean(x over base_year months).
DatedSeries rebase(const DatedSeries& series, int base_year);
DatedSeries log_levels(const DatedSeries& series);
DatedSeries difference(const DatedSeries& series);
// ln(x_t) - ln(x_{t-1}); result is one observation shorter.
DatedSeries log_diff(const DatedSeries& series);

// Removes OLS-fitted month-of-year effects (intercept, linear trend and 11
// month dummies in the regression; only the dummy part is subtracted) and
// re-centers the result on the input mean.
DatedSeries seasonal_adjust_dummies(const DatedSeries& series);

}  // namespace oca
