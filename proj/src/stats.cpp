#include "oca/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace oca::stats {

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ErrorCode on_rank_deficient) {
  if (x.rows() != y.size()) throw Error(ErrorCode::invalid_argument, "ols: row mismatch");
  if (x.rows() < x.cols()) throw Error(on_rank_deficient, "ols: fewer observations than regressors");

  // Scale columns to unit norm so the rank threshold is scale free.
  Eigen::VectorXd norms = x.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < norms.size(); ++j) {
    if (!(norms[j] > 0.0)) throw Error(on_rank_deficient, "ols: all-zero regressor column");
  }
  Eigen::MatrixXd xs = x * norms.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) throw Error(on_rank_deficient, "ols: regressors are collinear");

  OlsFit fit;
  fit.beta = norms.cwiseInverse().asDiagonal() * qr.solve(y);
  fit.residuals = y - x * fit.beta;
  fit.ssr = fit.residuals.squaredNorm();

  // (X'X)^{-1} = D^{-1} (Xs'Xs)^{-1} D^{-1}, with Xs'Xs = P R'R P'.
  const Eigen::Index k = x.cols();
  Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd rinv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd inner = rinv * rinv.transpose();
  Eigen::MatrixXd perm = qr.colsPermutation();
  Eigen::MatrixXd xs_inv = perm * inner * perm.transpose();
  fit.xtx_inverse = norms.cwiseInverse().asDiagonal() * xs_inv * norms.cwiseInverse().asDiagonal();
  return fit;
}

double chi_square_sf(double stat, double df) {
  if (!(stat > 0.0)) return 1.0;
  if (std::isinf(stat)) return 0.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace oca::stats
