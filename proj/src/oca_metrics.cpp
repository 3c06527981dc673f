#include "oca/oca_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <set>

#include "oca/error.hpp"
#include "oca/stats.hpp"

namespace oca {

ShockPanel align_common(std::span<const CountrySeries> series, Shock kind) {
  if (series.empty()) throw Error(ErrorCode::insufficient_overlap, "no shock series given");
  YearMonth lo = series.front().dates.empty() ? YearMonth{} : series.front().dates.front();
  YearMonth hi = series.front().dates.empty() ? YearMonth{} : series.front().dates.back();
  for (const auto& s : series) {
    if (s.dates.empty() || s.dates.size() != s.values.size()) {
      throw Error(ErrorCode::insufficient_overlap, s.country + ": empty or malformed series");
    }
    for (std::size_t t = 1; t < s.dates.size(); ++t) {
      if (s.dates[t] != s.dates[t - 1].next()) throw Error(ErrorCode::gap_in_calendar, s.country + " shock calendar has a gap");
    }
    lo = std::max(lo, s.dates.front());
    hi = std::min(hi, s.dates.back());
  }
  if (hi < lo) throw Error(ErrorCode::insufficient_overlap, "shock series share no dates");

  ShockPanel out;
  out.kind = kind;
  out.dates = make_calendar(lo, static_cast<std::size_t>(hi.index() - lo.index() + 1));
  out.values.resize(static_cast<Eigen::Index>(out.dates.size()), static_cast<Eigen::Index>(series.size()));
  for (std::size_t c = 0; c < series.size(); ++c) {
    const auto offset = static_cast<std::size_t>(calendar_position(series[c].dates, lo));
    out.countries.push_back(series[c].country);
    for (std::size_t t = 0; t < out.dates.size(); ++t) {
      out.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = series[c].values[offset + t];
    }
  }
  return out;
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) return 1.0;
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n) - 2.0;
  return stats::student_t_two_sided(r * std::sqrt(df / (1.0 - r * r)), df);
}

CorrelationReport correlation_matrix(const ShockPanel& panel) {
  const auto k = panel.values.cols();
  if (k < 2) throw Error(ErrorCode::insufficient_overlap, "correlation needs at least two countries");
  const auto n = static_cast<std::size_t>(panel.values.rows());
  if (n < 10) throw Error(ErrorCode::insufficient_overlap, "common overlap of " + std::to_string(n) + " < 10 observations");
  CorrelationReport out;
  out.countries = panel.countries;
  out.n = n;
  out.kind = panel.kind;
  out.r = Eigen::MatrixXd::Identity(k, k);
  out.p = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::VectorXd xi = panel.values.col(i);
    if (!((xi.array() - xi.mean()).square().sum() > 0.0)) {
      throw Error(ErrorCode::zero_variance_series, panel.countries[static_cast<std::size_t>(i)] + " has zero variance");
    }
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const Eigen::VectorXd xi = panel.values.col(i), xj = panel.values.col(j);
      const double r = stats::pearson({xi.data(), n}, {xj.data(), n});
      out.r(i, j) = out.r(j, i) = r;
      out.p(i, j) = out.p(j, i) = correlation_p_value(r, n);
    }
  }
  return out;
}

CorrelationReport correlation_matrix(std::span<const CountrySeries> series, Shock kind) {
  return correlation_matrix(align_common(series, kind));
}

namespace {

using NodeSet = std::vector<std::size_t>;

// Bron-Kerbosch with pivoting over an adjacency matrix.
void bron_kerbosch(const std::vector<std::vector<bool>>& adj, NodeSet r, NodeSet p, NodeSet x,
                   std::vector<NodeSet>& cliques) {
  if (p.empty() && x.empty()) {
    cliques.push_back(r);
    return;
  }
  std::size_t pivot = p.empty() ? x.front() : p.front();
  std::size_t best = 0;
  for (const NodeSet* set : {&p, &x}) {
    for (std::size_t u : *set) {
      std::size_t deg = 0;
      for (std::size_t v : p) deg += adj[u][v] ? 1 : 0;
      if (deg > best) {
        best = deg;
        pivot = u;
      }
    }
  }
  const NodeSet candidates = p;
  for (std::size_t v : candidates) {
    if (adj[pivot][v]) continue;
    NodeSet r2 = r, p2, x2;
    r2.push_back(v);
    for (std::size_t u : p) if (adj[v][u]) p2.push_back(u);
    for (std::size_t u : x) if (adj[v][u]) x2.push_back(u);
    bron_kerbosch(adj, r2, p2, x2, cliques);
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

}  // namespace

SymmetryReport classify_symmetry(const CorrelationReport& report, double alpha) {
  const std::size_t k = report.countries.size();
  SymmetryReport out;
  out.countries = report.countries;
  out.symmetric.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      out.symmetric[i][j] = report.r(ii, jj) > 0.0 && report.p(ii, jj) < alpha;
    }
  }
  NodeSet all(k);
  for (std::size_t i = 0; i < k; ++i) all[i] = i;
  std::vector<NodeSet> cliques;
  bron_kerbosch(out.symmetric, {}, all, {}, cliques);
  for (const auto& c : cliques) {
    if (c.size() < 3) continue;
    std::vector<std::string> names;
    for (std::size_t i : c) names.push_back(report.countries[i]);
    std::sort(names.begin(), names.end());
    out.groups.push_back(std::move(names));
  }
  std::sort(out.groups.begin(), out.groups.end());
  return out;
}

WeightTable::WeightTable(std::map<int, std::map<std::string, double>> rows) : rows_(std::move(rows)) {
  for (const auto& [year, row] : rows_) {
    for (const auto& [country, w] : row) {
      if (!(w > 0.0 && w < 1.0)) {
        throw Error(ErrorCode::weight_degenerate, country + " weight in " + std::to_string(year) + " outside (0, 1)");
      }
    }
  }
}

double WeightTable::year_sum(int year) const {
  auto it = rows_.find(year);
  if (it == rows_.end()) throw Error(ErrorCode::missing_weight_year, "no weights for " + std::to_string(year));
  double s = 0.0;
  for (const auto& [country, w] : it->second) s += w;
  return s;
}

std::vector<double> WeightTable::normalized(int year, std::span<const std::string> countries) const {
  auto it = rows_.find(year);
  if (it == rows_.end()) throw Error(ErrorCode::missing_weight_year, "no weights for " + std::to_string(year));
  std::vector<double> w;
  double sum = 0.0;
  for (const auto& c : countries) {
    auto cw = it->second.find(c);
    if (cw == it->second.end()) {
      throw Error(ErrorCode::missing_weight_year, "no weight for " + c + " in " + std::to_string(year));
    }
    w.push_back(cw->second);
    sum += cw->second;
  }
  for (double& v : w) v /= sum;
  // The last entry absorbs the rounding residue so the left-to-right sum is exactly one.
  if (w.size() > 1) {
    const double head = std::accumulate(w.begin(), w.end() - 1, 0.0);
    w.back() = 1.0 - head;
    for (int i = 0; i < 4 && head + w.back() != 1.0; ++i) {
      w.back() = std::nextafter(w.back(), head + w.back() < 1.0 ? 2.0 : 0.0);
    }
  }
  return w;
}

WeightTable load_weights(std::istream& in) {
  std::map<int, std::map<std::string, double>> rows;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      auto pos = line.find(',', start);
      f.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (!header) {
      if (f.size() != 3 || f[0] != "year" || f[1] != "country" || f[2] != "weight") {
        throw Error(ErrorCode::parse_error, "expected header 'year,country,weight'");
      }
      header = true;
      continue;
    }
    const std::string where = " at line " + std::to_string(line_no);
    int year = 0;
    double w = 0.0;
    if (f.size() != 3) throw Error(ErrorCode::parse_error, "expected 3 fields" + where);
    auto ry = std::from_chars(f[0].data(), f[0].data() + f[0].size(), year);
    auto rw = std::from_chars(f[2].data(), f[2].data() + f[2].size(), w);
    if (ry.ec != std::errc{} || ry.ptr != f[0].data() + f[0].size() || rw.ec != std::errc{} ||
        rw.ptr != f[2].data() + f[2].size() || f[1].empty()) {
      throw Error(ErrorCode::parse_error, "malformed weight row" + where);
    }
    if (!rows[year].emplace(f[1], w).second) throw Error(ErrorCode::duplicate_row, f[1] + " " + f[0] + where);
  }
  if (!header) throw Error(ErrorCode::parse_error, "empty weights input");
  WeightTable table(std::move(rows));
  for (const auto& [year, row] : table.rows()) {
    const double s = table.year_sum(year);
    if (std::abs(s - 1.0) > WeightTable::kSumTolerance) {
      throw Error(ErrorCode::weight_sum_out_of_tolerance, "weights for " + std::to_string(year) + " sum to " + std::to_string(s));
    }
  }
  return table;
}

WeightTable load_weights_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open weights '" + path + "'");
  return load_weights(in);
}

double dispersion_at(std::span<const double> x, std::span<const double> weights) {
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean += weights[i] * x[i];
    sq += weights[i] * weights[i];
  }
  if (!(sq < 1.0 - 1e-12)) throw Error(ErrorCode::weight_degenerate, "sum of squared weights reaches 1");
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) ss += weights[i] * (x[i] - mean) * (x[i] - mean);
  return std::sqrt(ss / (1.0 - sq));
}

namespace {

DispersionSeries dispersion_over(const ShockPanel& panel, const WeightTable& weights, std::span<const std::size_t> members) {
  std::vector<std::string> names;
  for (std::size_t c : members) names.push_back(panel.countries[c]);
  DispersionSeries out;
  out.kind = panel.kind;
  out.dates = panel.dates;
  out.values.reserve(panel.dates.size());
  int year = std::numeric_limits<int>::min();
  std::vector<double> w, x(members.size());
  for (std::size_t t = 0; t < panel.dates.size(); ++t) {
    if (panel.dates[t].year != year) {
      year = panel.dates[t].year;
      w = weights.normalized(year, names);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      x[i] = panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(members[i]));
    }
    out.values.push_back(dispersion_at(x, w));
  }
  return out;
}

}  // namespace

DispersionSeries dispersion_index(const ShockPanel& panel, const WeightTable& weights) {
  std::vector<std::size_t> all(panel.countries.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return dispersion_over(panel, weights, all);
}

CostSeries cost_of_inclusion(const ShockPanel& panel, const WeightTable& weights, std::string_view country) {
  if (panel.countries.size() < 3) throw Error(ErrorCode::group_too_small, "cost of inclusion needs at least 3 countries");
  auto it = std::find(panel.countries.begin(), panel.countries.end(), country);
  if (it == panel.countries.end()) {
    throw Error(ErrorCode::invalid_argument, "country '" + std::string(country) + "' not in group");
  }
  const auto excluded = static_cast<std::size_t>(it - panel.countries.begin());
  std::vector<std::size_t> all, rest;
  for (std::size_t i = 0; i < panel.countries.size(); ++i) {
    all.push_back(i);
    if (i != excluded) rest.push_back(i);
  }
  const auto full = dispersion_over(panel, weights, all);
  const auto sub = dispersion_over(panel, weights, rest);
  CostSeries out;
  out.country = std::string(country);
  out.kind = panel.kind;
  out.dates = panel.dates;
  for (std::size_t t = 0; t < full.values.size(); ++t) {
    if (!(full.values[t] > 0.0)) {
      throw Error(ErrorCode::zero_full_group_dispersion, "group dispersion is zero at " + panel.dates[t].str());
    }
    out.values.push_back((sub.values[t] - full.values[t]) / full.values[t]);
  }
  return out;
}

HpResult hp_filter(std::span<const double> y, double lambda) {
  const std::size_t n = y.size();
  if (n < 4) throw Error(ErrorCode::too_short, "hp_filter needs at least 4 observations");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::invalid_argument, "hp_filter lambda must be >= 0");

  // Band storage of I + lambda K'K: diag, first and second superdiagonals.
  std::vector<double> d0(n, 1.0), d1(n, 0.0), d2(n, 0.0);
  constexpr double k[3] = {1.0, -2.0, 1.0};
  for (std::size_t r = 0; r + 2 < n; ++r) {
    for (int a = 0; a < 3; ++a) {
      d0[r + a] += lambda * k[a] * k[a];
      if (a < 2) d1[r + a] += lambda * k[a] * k[a + 1];
      if (a < 1) d2[r + a] += lambda * k[a] * k[a + 2];
    }
  }

  // LDL' with unit lower bandwidth 2: l1[i] = L(i+1, i), l2[i] = L(i+2, i).
  std::vector<double> diag(n), l1(n, 0.0), l2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double di = d0[i];
    if (i >= 1) di -= l1[i - 1] * l1[i - 1] * diag[i - 1];
    if (i >= 2) di -= l2[i - 2] * l2[i - 2] * diag[i - 2];
    diag[i] = di;
    if (i + 1 < n) {
      double v = d1[i];
      if (i >= 1) v -= l2[i - 1] * l1[i - 1] * diag[i - 1];
      l1[i] = v / di;
    }
    if (i + 2 < n) l2[i] = d2[i] / di;
  }

  HpResult out;
  out.trend.assign(y.begin(), y.end());
  auto& z = out.trend;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 1) z[i] -= l1[i - 1] * z[i - 1];
    if (i >= 2) z[i] -= l2[i - 2] * z[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) z[i] /= diag[i];
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) z[i] -= l1[i] * z[i + 1];
    if (i + 2 < n) z[i] -= l2[i] * z[i + 2];
  }
  out.cycle.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.cycle[i] = y[i] - z[i];
  return out;
}

double trend_change(const Calendar& dates, std::span<const double> trend, YearMonth t0, YearMonth t1) {
  const long i0 = calendar_position(dates, t0), i1 = calendar_position(dates, t1);
  if (i0 < 0 || i1 < 0 || static_cast<std::size_t>(std::max(i0, i1)) >= trend.size()) {
    throw Error(ErrorCode::date_out_of_range, "trend window " + t0.str() + ".." + t1.str() + " outside the series");
  }
  const double base = trend[static_cast<std::size_t>(i0)];
  if (base == 0.0) throw Error(ErrorCode::zero_base, "trend is zero at " + t0.str());
  return 100.0 * (trend[static_cast<std::size_t>(i1)] - base) / base;
}

}  // namespace oca
