#include "oca/var_engine.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "oca/error.hpp"
#include "oca/stats.hpp"

namespace oca {

std::string_view to_string(DummySpec::Form form) { return form == DummySpec::Form::step ? "step" : "pulse"; }

VarData VarData::from(const TransformedSeries& activity, const TransformedSeries& price) {
  if (activity.dates != price.dates) throw Error(ErrorCode::calendar_mismatch, "VAR inputs are not aligned");
  if (activity.values.size() != activity.dates.size() || price.values.size() != price.dates.size()) {
    throw Error(ErrorCode::invalid_argument, "VAR input dates/values length mismatch");
  }
  VarData d;
  d.dates = activity.dates;
  d.values.resize(static_cast<Eigen::Index>(activity.values.size()), 2);
  for (std::size_t t = 0; t < activity.values.size(); ++t) {
    d.values(static_cast<Eigen::Index>(t), 0) = activity.values[t];
    d.values(static_cast<Eigen::Index>(t), 1) = price.values[t];
  }
  return d;
}

VarData VarData::tail_from(Eigen::Index offset) const {
  VarData d;
  d.dates.assign(dates.begin() + offset, dates.end());
  d.values = values.bottomRows(values.rows() - offset);
  return d;
}

Eigen::Matrix2d VarModel::lag_sum() const {
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  for (const auto& b : lag_matrices) s += b;
  return s;
}

Eigen::Matrix2d VarModel::sigma_ml() const {
  return residuals.transpose() * residuals / static_cast<double>(residuals.rows());
}

VarModel fit_var(const VarData& data, int p, const std::vector<DummySpec>& dummies, SigmaDivisor divisor) {
  if (p < 1) throw Error(ErrorCode::invalid_argument, "fit_var: p must be >= 1");
  const Eigen::Index total = data.size();
  const Eigen::Index rows = total - p;
  const auto m = static_cast<Eigen::Index>(dummies.size());
  const Eigen::Index ncols = 1 + 2 * p + m;
  if (rows < 10 + ncols) {
    throw Error(ErrorCode::too_short, "fit_var: " + std::to_string(std::max<Eigen::Index>(rows, 0)) +
                                          " effective observations for " + std::to_string(ncols) + " regressors");
  }
  for (const auto& d : dummies) {
    if (calendar_position(data.dates, d.break_date) < 0) {
      throw Error(ErrorCode::date_out_of_range, "dummy break date " + d.break_date.str() + " outside sample");
    }
  }

  VarModel model;
  model.p = p;
  model.dummies = dummies;
  model.divisor = divisor;
  model.effective_dates.assign(data.dates.begin() + p, data.dates.end());
  model.design.resize(rows, ncols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index t = r + p;
    model.design(r, 0) = 1.0;
    for (int lag = 1; lag <= p; ++lag) {
      model.design(r, 1 + 2 * (lag - 1)) = data.values(t - lag, 0);
      model.design(r, 2 + 2 * (lag - 1)) = data.values(t - lag, 1);
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      model.design(r, 1 + 2 * p + j) = dummies[static_cast<std::size_t>(j)].value_at(data.dates[static_cast<std::size_t>(t)]);
    }
  }

  model.coefficients = Eigen::MatrixXd::Constant(2, ncols, std::numeric_limits<double>::quiet_NaN());
  model.standard_errors = model.coefficients;
  model.residuals.resize(rows, 2);
  model.exog_coefficients = Eigen::MatrixXd::Zero(2, m);
  model.lag_matrices.assign(static_cast<std::size_t>(p), Eigen::Matrix2d::Zero());

  for (int eq = 0; eq < 2; ++eq) {
    auto& cols = model.equation_columns[static_cast<std::size_t>(eq)];
    for (Eigen::Index j = 0; j < 1 + 2 * p; ++j) cols.push_back(j);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& d = dummies[static_cast<std::size_t>(j)];
      if (d.scope == DummySpec::Scope::both || static_cast<int>(d.variable) == eq) cols.push_back(1 + 2 * p + j);
    }
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) x.col(static_cast<Eigen::Index>(c)) = model.design.col(cols[c]);
    const Eigen::VectorXd y = data.values.col(eq).tail(rows);
    auto fit = stats::ols(x, y, ErrorCode::rank_deficient_regressors);
    model.residuals.col(eq) = fit.residuals;
    const double s2 = fit.ssr / static_cast<double>(rows - x.cols());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      model.coefficients(eq, cols[c]) = fit.beta[ci];
      model.standard_errors(eq, cols[c]) = fit.standard_error(ci, s2);
    }
    model.intercept[eq] = fit.beta[0];
    for (int lag = 1; lag <= p; ++lag) {
      model.lag_matrices[static_cast<std::size_t>(lag - 1)](eq, 0) = fit.beta[1 + 2 * (lag - 1)];
      model.lag_matrices[static_cast<std::size_t>(lag - 1)](eq, 1) = fit.beta[2 + 2 * (lag - 1)];
    }
    for (std::size_t c = static_cast<std::size_t>(1 + 2 * p); c < cols.size(); ++c) {
      model.exog_coefficients(eq, cols[c] - (1 + 2 * p)) = fit.beta[static_cast<Eigen::Index>(c)];
    }
  }

  Eigen::Matrix2d cross = model.residuals.transpose() * model.residuals;
  double denom = static_cast<double>(rows);
  if (divisor == SigmaDivisor::dof) denom -= static_cast<double>(ncols);
  model.sigma = cross / denom;
  model.sigma(1, 0) = model.sigma(0, 1);
  return model;
}

Eigen::MatrixXd companion_matrix(std::span<const Eigen::Matrix2d> lag_matrices) {
  const auto p = static_cast<Eigen::Index>(lag_matrices.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * p, 2 * p);
  for (Eigen::Index i = 0; i < p; ++i) c.block(0, 2 * i, 2, 2) = lag_matrices[static_cast<std::size_t>(i)];
  if (p > 1) c.block(2, 0, 2 * (p - 1), 2 * (p - 1)).setIdentity();
  return c;
}

StabilityReport stability(std::span<const Eigen::Matrix2d> lag_matrices) {
  StabilityReport out;
  if (lag_matrices.empty()) {
    out.stable = true;
    return out;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion_matrix(lag_matrices), false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.moduli.push_back(std::abs(es.eigenvalues()[i]));
  std::sort(out.moduli.begin(), out.moduli.end(), std::greater<>());
  out.stable = out.moduli.front() < 1.0;
  return out;
}

TestResult portmanteau_test(const Eigen::MatrixXd& residuals, int h, int fitted_lags) {
  if (h <= fitted_lags || h < 1) {
    throw Error(ErrorCode::h_too_small, "portmanteau: h = " + std::to_string(h) + " must exceed p = " +
                                            std::to_string(fitted_lags));
  }
  const Eigen::Index n = residuals.rows();
  const Eigen::Index k = residuals.cols();
  if (n <= h) throw Error(ErrorCode::too_short, "portmanteau: fewer residuals than lags");
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd c0 = residuals.transpose() * residuals / nd;
  Eigen::LDLT<Eigen::MatrixXd> c0_inv(c0);
  if (c0_inv.info() != Eigen::Success || !(c0.determinant() > 0.0)) {
    throw Error(ErrorCode::sigma_not_positive_definite, "portmanteau: residual covariance is singular");
  }
  double q = 0.0;
  for (int j = 1; j <= h; ++j) {
    const Eigen::MatrixXd cj =
        residuals.bottomRows(n - j).transpose() * residuals.topRows(n - j) / nd;
    const Eigen::MatrixXd left = c0_inv.solve(cj.transpose());  // C0^{-1} Cj'
    const Eigen::MatrixXd right = c0_inv.solve(cj);             // C0^{-1} Cj
    q += (left * right).trace() / (nd - j);
  }
  TestResult out;
  out.statistic = nd * nd * q;
  out.df = static_cast<double>(k * k * (h - fitted_lags));
  out.p_value = stats::chi_square_sf(out.statistic, out.df);
  return out;
}

TestResult portmanteau_test(const VarModel& model, int h) { return portmanteau_test(model.residuals, h, model.p); }

TestResult arch_lm_test(std::span<const double> residuals, int q) {
  if (q < 1) throw Error(ErrorCode::invalid_argument, "arch_lm_test: q must be >= 1");
  if (residuals.size() <= static_cast<std::size_t>(5 * q)) {
    throw Error(ErrorCode::too_short, "arch_lm_test: need more than 5q residuals");
  }
  const auto n = static_cast<Eigen::Index>(residuals.size()) - q;
  Eigen::VectorXd y(n);
  Eigen::MatrixXd x(n, q + 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto t = static_cast<std::size_t>(r + q);
    y[r] = residuals[t] * residuals[t];
    x(r, 0) = 1.0;
    for (int j = 1; j <= q; ++j) x(r, j) = residuals[t - static_cast<std::size_t>(j)] * residuals[t - static_cast<std::size_t>(j)];
  }
  TestResult out;
  out.df = q;
  const double sst = (y.array() - y.mean()).square().sum();
  if (!(sst > 1e-300 * static_cast<double>(n))) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  double r2 = 0.0;
  try {
    auto fit = stats::ols(x, y);
    r2 = std::clamp(1.0 - fit.ssr / sst, 0.0, 1.0);
  } catch (const Error&) {
    r2 = 0.0;  // lagged squares collinear with the constant
  }
  out.statistic = static_cast<double>(n) * r2;
  out.p_value = stats::chi_square_sf(out.statistic, out.df);
  return out;
}

namespace {

int argmin_lag(const std::vector<double>& values) {
  return static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin()) + 1;
}

}  // namespace

LagSelection select_lag(const VarData& data, const LagSelectionOptions& options) {
  if (options.max_p < 1) throw Error(ErrorCode::invalid_argument, "select_lag: max_p must be >= 1");
  if (options.criteria.empty()) throw Error(ErrorCode::invalid_argument, "select_lag: no criteria requested");

  LagSelection out;
  const Eigen::Index effective = data.size() - options.max_p;
  const double n = static_cast<double>(effective);
  const double k2 = 4.0;
  const double deterministic = 2.0 * (1.0 + static_cast<double>(options.dummies.size()));
  for (int p = 1; p <= options.max_p; ++p) {
    // Same effective sample for every candidate.
    const VarModel m = fit_var(data.tail_from(options.max_p - p), p, options.dummies);
    const double logdet = std::log(m.sigma_ml().determinant());
    const double params = static_cast<double>(p) * k2 + deterministic;
    out.aic.push_back(logdet + 2.0 * params / n);
    out.sc.push_back(logdet + std::log(n) * params / n);
    out.hq.push_back(logdet + 2.0 * std::log(std::log(n)) * params / n);
  }
  out.aic_p = argmin_lag(out.aic);
  out.sc_p = argmin_lag(out.sc);
  out.hq_p = argmin_lag(out.hq);

  int start = options.max_p;
  for (Criterion c : options.criteria) {
    start = std::min(start, c == Criterion::aic ? out.aic_p : c == Criterion::sc ? out.sc_p : out.hq_p);
  }
  if (!options.diagnostics_gate) {
    out.p = start;
    return out;
  }

  for (int p = start; p <= options.max_p; ++p) {
    const VarModel m = fit_var(data, p, options.dummies);
    LagGateStep step;
    step.p = p;
    const auto st = stability(m);
    step.stable = st.stable;
    step.max_modulus = st.max_modulus();
    step.portmanteau_h = gate_portmanteau_h(options.portmanteau_h, p);
    step.portmanteau = portmanteau_test(m, step.portmanteau_h);
    for (int eq = 0; eq < 2; ++eq) {
      const Eigen::VectorXd col = m.residuals.col(eq);
      step.arch[static_cast<std::size_t>(eq)] = arch_lm_test(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), options.arch_q);
    }
    step.passed = step.stable && step.portmanteau.p_value >= options.alpha && step.arch[0].p_value >= options.alpha &&
                  step.arch[1].p_value >= options.alpha;
    out.trail.push_back(step);
    if (step.passed) {
      out.p = p;
      return out;
    }
  }

  std::ostringstream msg;
  msg << "no lag in [" << start << ", " << options.max_p << "] passes the diagnostics:";
  for (const auto& s : out.trail) {
    msg << " p=" << s.p << "(stable=" << (s.stable ? "yes" : "no") << ", Q p=" << s.portmanteau.p_value
        << ", ARCH p=" << s.arch[0].p_value << "/" << s.arch[1].p_value << ")";
  }
  throw Error(ErrorCode::no_admissible_lag, msg.str());
}

}  // namespace oca
