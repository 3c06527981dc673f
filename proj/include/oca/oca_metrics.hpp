#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oca/calendar.hpp"
#include "oca/series_store.hpp"
#include "oca/svar_id.hpp"

namespace oca {

// One country's structural shock series of a single kind.
struct CountrySeries {
  std::string country;
  Calendar dates;
  std::vector<double> values;
};

// Shocks of one kind on a common calendar, one column per country.
struct ShockPanel {
  std::vector<std::string> countries;
  Calendar dates;
  Eigen::MatrixXd values;  // dates x countries
  Shock kind = Shock::supply;
};

// Restricts every series to the dates they all share. Throws
// insufficient_overlap when the intersection is empty.
ShockPanel align_common(std::span<const CountrySeries> series, Shock kind);

struct CorrelationReport {
  std::vector<std::string> countries;
  Eigen::MatrixXd r;
  Eigen::MatrixXd p;
  std::size_t n = 0;
  Shock kind = Shock::supply;
};

// Pairwise Pearson correlation on the common overlap with two-sided
// Student-t(n - 2) p-values.
CorrelationReport correlation_matrix(const ShockPanel& panel);
CorrelationReport correlation_matrix(std::span<const CountrySeries> series, Shock kind);

// Correlation p-value from the t transform r sqrt((n - 2) / (1 - r^2)).
double correlation_p_value(double r, std::size_t n);

struct SymmetryReport {
  std::vector<std::string> countries;
  // symmetric[i][j]: r > 0 and p < alpha.
  std::vector<std::vector<bool>> symmetric;
  // Maximal cliques of size >= 3 in the symmetric-pair graph; each sorted,
  // the list sorted lexicographically.
  std::vector<std::vector<std::string>> groups;
};

SymmetryReport classify_symmetry(const CorrelationReport& report, double alpha);

// Annual economic-size weights.
class WeightTable {
 public:
  // Sum tolerance applied when loading a table.
  static constexpr double kSumTolerance = 0.005;

  WeightTable() = default;
  explicit WeightTable(std::map<int, std::map<std::string, double>> rows);

  const std::map<int, std::map<std::string, double>>& rows() const { return rows_; }
  // Weights of `countries` in `year` rescaled to sum to exactly one.
  std::vector<double> normalized(int year, std::span<const std::string> countries) const;
  double year_sum(int year) const;

 private:
  std::map<int, std::map<std::string, double>> rows_;
};

// CSV with header `year,country,weight`.
WeightTable load_weights(std::istream& in);
WeightTable load_weights_file(const std::string& path);

struct DispersionSeries {
  Calendar dates;
  std::vector<double> values;
  Shock kind = Shock::supply;
};

// Weighted cross-sectional dispersion at one date; `weights` must sum to one.
double dispersion_at(std::span<const double> x, std::span<const double> weights);

// S_t = [sum_i w_it (x_it - sum_j w_jt x_jt)^2 / (1 - sum_i w_it^2)]^(1/2), with
// each month using its calendar year's weights.
DispersionSeries dispersion_index(const ShockPanel& panel, const WeightTable& weights);

struct CostSeries {
  std::string country;
  Calendar dates;
  std::vector<double> values;
  Shock kind = Shock::supply;
};

// (S_{t|G-i} - S_{t|G}) / S_{t|G}; the remaining weights are renormalized per year.
CostSeries cost_of_inclusion(const ShockPanel& panel, const WeightTable& weights, std::string_view country);

struct HpResult {
  std::vector<double> trend;
  std::vector<double> cycle;
};

// Hodrick-Prescott trend from the pentadiagonal system (I + lambda K'K) tau = y
// with K the second-difference operator.
HpResult hp_filter(std::span<const double> y, double lambda = 14400.0);

// Percent change 100 (trend(t1) - trend(t0)) / trend(t0).
double trend_change(const Calendar& dates, std::span<const double> trend, YearMonth t0, YearMonth t1);

}  // namespace oca
