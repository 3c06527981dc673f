#include "oca/cointegration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "oca/error.hpp"

namespace oca {

namespace {

Eigen::MatrixXd partial_out(const Eigen::MatrixXd& z, const Eigen::MatrixXd& conditioning) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(conditioning);
  if (qr.rank() < conditioning.cols()) {
    throw Error(ErrorCode::singular_moment_matrix, "johansen: short-run regressors are collinear");
  }
  return z - conditioning * qr.solve(z);
}

}  // namespace

JohansenResult johansen_test(std::span<const double> first, std::span<const double> second, int lag_order) {
  if (first.size() != second.size()) throw Error(ErrorCode::invalid_argument, "johansen: series lengths differ");
  if (lag_order < 2) throw Error(ErrorCode::invalid_argument, "johansen: lag_order must be >= 2");
  const auto total = static_cast<Eigen::Index>(first.size());
  const Eigen::Index k = lag_order;
  const Eigen::Index n = total - k;
  if (n < 30) {
    throw Error(ErrorCode::too_short, "johansen: effective sample " + std::to_string(std::max<Eigen::Index>(n, 0)) +
                                          " < 30");
  }

  auto level = [&](Eigen::Index t, int j) { return j == 0 ? first[static_cast<std::size_t>(t)] : second[static_cast<std::size_t>(t)]; };
  auto diff = [&](Eigen::Index t, int j) { return level(t, j) - level(t - 1, j); };

  Eigen::MatrixXd z0(n, 2), z1(n, 3), z2(n, 1 + 2 * (k - 1));
  for (Eigen::Index row = 0; row < n; ++row) {
    const Eigen::Index t = row + k;
    for (int j = 0; j < 2; ++j) {
      z0(row, j) = diff(t, j);
      z1(row, j) = level(t - 1, j);
    }
    z1(row, 2) = static_cast<double>(t);
    z2(row, 0) = 1.0;
    for (Eigen::Index lag = 1; lag < k; ++lag) {
      for (int j = 0; j < 2; ++j) z2(row, 1 + 2 * (lag - 1) + j) = diff(t - lag, j);
    }
  }

  const Eigen::MatrixXd r0 = partial_out(z0, z2);
  const Eigen::MatrixXd r1 = partial_out(z1, z2);
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd s00 = r0.transpose() * r0 * inv_n;
  const Eigen::MatrixXd s01 = r0.transpose() * r1 * inv_n;
  const Eigen::MatrixXd s11 = r1.transpose() * r1 * inv_n;

  Eigen::LLT<Eigen::MatrixXd> llt00(s00), llt11(s11);
  if (llt00.info() != Eigen::Success || llt11.info() != Eigen::Success) {
    throw Error(ErrorCode::singular_moment_matrix, "johansen: residual moment matrix is not positive definite");
  }
  // Symmetrised problem: L^{-1} S10 S00^{-1} S01 L^{-T} with S11 = L L'.
  const Eigen::MatrixXd lower = llt11.matrixL();
  const Eigen::MatrixXd a = lower.triangularView<Eigen::Lower>().solve(s01.transpose());
  Eigen::MatrixXd m = a * llt00.solve(a.transpose());
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::singular_moment_matrix, "johansen: eigen solver failed");

  // Ascending from the solver; the smallest of the three is structurally zero.
  Eigen::VectorXd lambdas = eig.eigenvalues();
  JohansenResult out;
  out.nobs = static_cast<std::size_t>(n);
  out.lag_order = lag_order;
  for (int i = 0; i < 2; ++i) {
    double lam = lambdas[2 - i];
    out.eigenvalues[static_cast<std::size_t>(i)] = std::clamp(lam, 0.0, std::nextafter(1.0, 0.0));
  }
  for (int i = 0; i < 2; ++i) {
    out.max_eig_stats[static_cast<std::size_t>(i)] =
        -static_cast<double>(n) * std::log1p(-out.eigenvalues[static_cast<std::size_t>(i)]);
  }
  out.trace_stats[1] = out.max_eig_stats[1];
  out.trace_stats[0] = out.max_eig_stats[0] + out.trace_stats[1];

  out.selected_rank = 2;
  for (int r = 0; r < 2; ++r) {
    if (!(out.trace_stats[static_cast<std::size_t>(r)] > out.critical_values_trace[static_cast<std::size_t>(r)])) {
      out.selected_rank = r;
      break;
    }
  }
  return out;
}

}  // namespace oca
