#pragma once

#include <span>

#include <Eigen/Dense>

#include "oca/error.hpp"

namespace oca::stats {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double ssr = 0.0;
  // (X'X)^{-1}, for coefficient standard errors.
  Eigen::MatrixXd xtx_inverse;

  double standard_error(Eigen::Index j, double sigma2) const {
    return std::sqrt(sigma2 * xtx_inverse(j, j));
  }
};

// Least squares via column-pivoted QR. Throws Error(on_rank_deficient) when
// the design does not have full column rank.
OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
           ErrorCode on_rank_deficient = ErrorCode::rank_deficient_regressors);

// Upper tail P(X > stat) for X ~ chi-square(df).
double chi_square_sf(double stat, double df);
// Two-sided p-value of a t statistic with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

double mean(std::span<const double> x);
// Pearson correlation; NaN when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace oca::stats
