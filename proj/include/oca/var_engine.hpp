#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oca/calendar.hpp"
#include "oca/series_store.hpp"

namespace oca {

// Deterministic break regressor for the differenced system.
struct DummySpec {
  enum class Form { step, pulse };
  // Which equations receive the column: both (default) or only the one of `variable`.
  enum class Scope { both, own };

  Variable variable = Variable::activity;
  YearMonth break_date;
  Form form = Form::step;
  Scope scope = Scope::both;

  // 1 from the break date onward (step) or only at it (pulse).
  double value_at(YearMonth date) const {
    return form == Form::step ? (date >= break_date ? 1.0 : 0.0) : (date == break_date ? 1.0 : 0.0);
  }
};

std::string_view to_string(DummySpec::Form form);

enum class SigmaDivisor {
  ml,   // 1 / (T - p)
  dof,  // 1 / (T - p - regressors per equation)
};

// Aligned two-variable system, activity first.
struct VarData {
  Calendar dates;
  Eigen::MatrixXd values;  // T x 2

  static VarData from(const TransformedSeries& activity, const TransformedSeries& price);
  Eigen::Index size() const { return values.rows(); }
  // Rows [offset, end).
  VarData tail_from(Eigen::Index offset) const;
};

// Reduced-form VAR(p) with intercept and optional dummy columns, estimated
// equation by equation with OLS.
struct VarModel {
  int p = 0;
  std::vector<Eigen::Matrix2d> lag_matrices;  // B_1..B_p
  Eigen::Vector2d intercept = Eigen::Vector2d::Zero();
  std::vector<DummySpec> dummies;
  Eigen::MatrixXd exog_coefficients;  // 2 x dummies; zero where a dummy is excluded
  Eigen::MatrixXd residuals;          // (T - p) x 2
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  SigmaDivisor divisor = SigmaDivisor::ml;
  Calendar effective_dates;

  // Full regressor matrix [1, X_{t-1}', ..., X_{t-p}', dummies] on the effective sample.
  Eigen::MatrixXd design;
  // Per equation, which design columns it uses.
  std::array<std::vector<Eigen::Index>, 2> equation_columns;
  // Per equation, coefficient and standard error in design-column order (NaN when excluded).
  Eigen::MatrixXd coefficients;    // 2 x design.cols()
  Eigen::MatrixXd standard_errors; // 2 x design.cols()

  Eigen::Index nobs() const { return residuals.rows(); }
  Eigen::Matrix2d lag_sum() const;
  // Max-likelihood residual covariance regardless of `divisor`.
  Eigen::Matrix2d sigma_ml() const;
};

VarModel fit_var(const VarData& data, int p, const std::vector<DummySpec>& dummies = {},
                 SigmaDivisor divisor = SigmaDivisor::ml);

struct StabilityReport {
  std::vector<double> moduli;  // descending, 2p entries
  bool stable = false;
  double max_modulus() const { return moduli.empty() ? 0.0 : moduli.front(); }
};

Eigen::MatrixXd companion_matrix(std::span<const Eigen::Matrix2d> lag_matrices);
StabilityReport stability(std::span<const Eigen::Matrix2d> lag_matrices);
inline StabilityReport stability(const VarModel& model) { return stability(model.lag_matrices); }

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

// Adjusted multivariate portmanteau statistic
//   Q_h = n^2 sum_{j=1..h} tr(C_j' C_0^{-1} C_j C_0^{-1}) / (n - j)
// against chi-square(K^2 (h - fitted_lags)).
TestResult portmanteau_test(const Eigen::MatrixXd& residuals, int h, int fitted_lags);
TestResult portmanteau_test(const VarModel& model, int h);

// Engle LM test: n R^2 from regressing e_t^2 on a constant and q own lags.
TestResult arch_lm_test(std::span<const double> residuals, int q);

enum class Criterion { aic, sc, hq };

struct LagGateStep {
  int p = 0;
  double max_modulus = 0.0;
  bool stable = false;
  int portmanteau_h = 0;
  TestResult portmanteau;
  std::array<TestResult, 2> arch;
  bool passed = false;
};

struct LagSelection {
  int p = 0;
  int aic_p = 0, sc_p = 0, hq_p = 0;
  // Criterion values for p = 1..max_p on the common sample.
  std::vector<double> aic, sc, hq;
  std::vector<LagGateStep> trail;
};

struct LagSelectionOptions {
  int max_p = 12;
  std::vector<Criterion> criteria = {Criterion::aic, Criterion::sc, Criterion::hq};
  bool diagnostics_gate = true;
  int portmanteau_h = 12;
  int arch_q = 4;
  double alpha = 0.05;
  std::vector<DummySpec> dummies;
};

// Portmanteau horizon used by the gate for a candidate lag.
inline int gate_portmanteau_h(int h, int p) { return std::max(h, p + 4); }

// Starts at the smallest lag chosen by the requested criteria and, when the
// gate is on, increments until the model is stable and neither residual
// diagnostic rejects at `alpha`.
LagSelection select_lag(const VarData& data, const LagSelectionOptions& options = {});

}  // namespace oca
