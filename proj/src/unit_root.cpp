#include "oca/unit_root.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oca/error.hpp"
#include "oca/stats.hpp"

namespace oca {

std::string_view to_string(AdfSpec spec) {
  switch (spec) {
    case AdfSpec::none: return "none";
    case AdfSpec::constant: return "constant";
    case AdfSpec::trend: return "trend";
  }
  return "trend";
}

AdfSpec parse_adf_spec(std::string_view text) {
  if (text == "none" || text == "nc") return AdfSpec::none;
  if (text == "constant" || text == "c") return AdfSpec::constant;
  if (text == "trend" || text == "ct" || text == "constant+trend") return AdfSpec::trend;
  throw Error(ErrorCode::invalid_argument, "unknown ADF spec '" + std::string(text) + "'");
}

namespace {

// MacKinnon (2010), Table 2, N = 1: b0 + b1/T + b2/T^2 + b3/T^3 for 1%, 5%, 10%.
constexpr double kSurfaceNone[3][4] = {
    {-2.56574, -2.2358, -3.627, 0.0},
    {-1.94100, -0.2686, -3.365, 31.223},
    {-1.61682, 0.2656, -2.714, 25.364},
};
constexpr double kSurfaceConstant[3][4] = {
    {-3.43035, -6.5393, -16.786, -79.433},
    {-2.86154, -2.8903, -4.234, -40.040},
    {-2.56677, -1.5384, -2.809, 0.0},
};
constexpr double kSurfaceTrend[3][4] = {
    {-3.95877, -9.0531, -28.428, -134.155},
    {-3.41049, -4.3904, -9.036, -45.374},
    {-3.12705, -2.5856, -3.925, -22.380},
};

int deterministic_columns(AdfSpec spec) {
  switch (spec) {
    case AdfSpec::none: return 0;
    case AdfSpec::constant: return 1;
    case AdfSpec::trend: return 2;
  }
  return 2;
}

struct Regression {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::Index level_column = 0;
};

// Rows i = first..last of the differenced series; level y[i], lags dy[i-1..i-k].
Regression build(std::span<const double> y, std::span<const double> dy, AdfSpec spec, int k, int first) {
  const int ndet = deterministic_columns(spec);
  const auto rows = static_cast<Eigen::Index>(dy.size()) - first;
  Regression r;
  r.x.resize(rows, ndet + 1 + k);
  r.y.resize(rows);
  r.level_column = ndet;
  for (Eigen::Index row = 0; row < rows; ++row) {
    const auto i = static_cast<std::size_t>(first + row);
    Eigen::Index col = 0;
    if (ndet >= 1) r.x(row, col++) = 1.0;
    if (ndet >= 2) r.x(row, col++) = static_cast<double>(i + 1);
    r.x(row, col++) = y[i];
    for (int j = 1; j <= k; ++j) r.x(row, col++) = dy[i - static_cast<std::size_t>(j)];
    r.y[row] = dy[i];
  }
  return r;
}

}  // namespace

std::array<double, 3> adf_critical_values(AdfSpec spec, std::size_t nobs) {
  const auto& table = spec == AdfSpec::none ? kSurfaceNone : spec == AdfSpec::constant ? kSurfaceConstant : kSurfaceTrend;
  const double inv = 1.0 / static_cast<double>(nobs);
  std::array<double, 3> cv{};
  for (int l = 0; l < 3; ++l) {
    cv[static_cast<std::size_t>(l)] = table[l][0] + table[l][1] * inv + table[l][2] * inv * inv + table[l][3] * inv * inv * inv;
  }
  return cv;
}

AdfResult adf_test(std::span<const double> series, AdfSpec spec, int max_lags, LagRule rule) {
  if (max_lags < 0) throw Error(ErrorCode::invalid_argument, "max_lags must be >= 0");
  if (rule.kind == LagRule::Kind::fixed && rule.lags < 0) throw Error(ErrorCode::invalid_argument, "fixed lag must be >= 0");
  for (double v : series) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "adf_test: non-finite value");
  }
  const int widest = rule.kind == LagRule::Kind::fixed ? rule.lags : max_lags;
  if (series.size() < 2 || static_cast<long>(series.size()) - 1 - widest < 20) {
    throw Error(ErrorCode::too_short, "adf_test: fewer than 20 effective observations (length " +
                                          std::to_string(series.size()) + ", lags " + std::to_string(widest) + ")");
  }
  auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw Error(ErrorCode::degenerate_regressor, "adf_test: constant series");

  std::vector<double> dy(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) dy[i - 1] = series[i] - series[i - 1];

  int k = rule.lags;
  if (rule.kind == LagRule::Kind::aic) {
    double best = std::numeric_limits<double>::infinity();
    for (int cand = 0; cand <= max_lags; ++cand) {
      auto reg = build(series, dy, spec, cand, max_lags);
      auto fit = stats::ols(reg.x, reg.y, ErrorCode::degenerate_regressor);
      const auto n = static_cast<double>(reg.y.size());
      const double aic = n * std::log(fit.ssr / n) + 2.0 * static_cast<double>(reg.x.cols());
      if (aic < best - 1e-12) {
        best = aic;
        k = cand;
      }
    }
  }

  auto reg = build(series, dy, spec, k, k);
  auto fit = stats::ols(reg.x, reg.y, ErrorCode::degenerate_regressor);
  const auto nobs = static_cast<std::size_t>(reg.y.size());
  const double dof = static_cast<double>(reg.y.size() - reg.x.cols());
  const double sigma2 = fit.ssr / dof;
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::degenerate_regressor, "adf_test: perfect fit");

  AdfResult out;
  out.spec = spec;
  out.lags_used = k;
  out.nobs = nobs;
  out.statistic = fit.beta[reg.level_column] / fit.standard_error(reg.level_column, sigma2);
  out.critical_values = adf_critical_values(spec, nobs);
  for (std::size_t l = 0; l < kAdfLevels.size(); ++l) {
    if (out.statistic < out.critical_values[l]) {
      out.reject_at = kAdfLevels[l];
      break;
    }
  }
  return out;
}

IntegrationOrder integration_order(std::span<const double> series, AdfSpec spec, int max_order, int max_lags,
                                   LagRule rule) {
  IntegrationOrder out;
  std::vector<double> current(series.begin(), series.end());
  for (int d = 0; d <= max_order; ++d) {
    if (d > 0) {
      std::vector<double> next(current.size() - 1);
      for (std::size_t i = 1; i < current.size(); ++i) next[i - 1] = current[i] - current[i - 1];
      current = std::move(next);
    }
    out.trail.push_back(adf_test(current, spec, max_lags, rule));
    if (out.trail.back().rejects(0.05)) {
      out.order = d;
      return out;
    }
  }
  throw Error(ErrorCode::inconclusive_at_max_order,
              "no unit-root rejection at 5% up to difference order " + std::to_string(max_order));
}

}  // namespace oca
