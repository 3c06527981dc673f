#include "oca/svar_id.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "oca/error.hpp"

namespace oca {

std::string_view to_string(Shock s) { return s == Shock::supply ? "supply" : "demand"; }

Shock parse_shock(std::string_view text) {
  if (text == "supply") return Shock::supply;
  if (text == "demand") return Shock::demand;
  throw Error(ErrorCode::invalid_argument, "unknown shock kind '" + std::string(text) + "'");
}

Eigen::Matrix2d long_run_matrix(std::span<const Eigen::Matrix2d> lag_matrices) {
  const auto st = stability(lag_matrices);
  if (st.max_modulus() > kMaxStableModulus) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "max companion modulus %.6f exceeds %.4f", st.max_modulus(), kMaxStableModulus);
    throw Error(ErrorCode::unstable_model, buf);
  }
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  for (const auto& b : lag_matrices) m -= b;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
  const double smax = svd.singularValues()[0], smin = svd.singularValues()[1];
  if (!(smin > 0.0) || smax / smin > 1e12) throw Error(ErrorCode::unstable_model, "I - sum(B) is singular");
  return m.inverse();
}

Eigen::Matrix2d long_run_matrix(const VarModel& model) { return long_run_matrix(model.lag_matrices); }

StructuralModel identify_bq(const VarModel& model) {
  const Eigen::Matrix2d d1 = long_run_matrix(model);
  const Eigen::Matrix2d& sigma = model.sigma;
  if (!sigma.allFinite() || !(sigma(0, 0) > 0.0) || !(sigma.determinant() > 1e-14 * sigma(0, 0) * sigma(1, 1))) {
    throw Error(ErrorCode::sigma_not_positive_definite, "residual covariance is not positive definite");
  }
  Eigen::Matrix2d s = d1 * sigma * d1.transpose();
  s(1, 0) = s(0, 1) = 0.5 * (s(0, 1) + s(1, 0));
  Eigen::LLT<Eigen::Matrix2d> llt(s);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::sigma_not_positive_definite, "long-run covariance has no Cholesky factor");
  }
  Eigen::Matrix2d f = llt.matrixL();
  // Positive long-run own effects; columns of F, A0 and the shocks flip together.
  for (int j = 0; j < 2; ++j) {
    if (f(j, j) < 0.0) f.col(j) = -f.col(j);
  }
  StructuralModel out;
  out.long_run = f;
  out.long_run(0, 1) = 0.0;
  out.a0 = (Eigen::Matrix2d::Identity() - model.lag_sum()) * f;
  out.shocks = model.residuals * out.a0.inverse().transpose();
  out.dates = model.effective_dates;
  return out;
}

std::vector<Eigen::Matrix2d> ma_matrices(std::span<const Eigen::Matrix2d> lag_matrices, int horizon) {
  std::vector<Eigen::Matrix2d> d(static_cast<std::size_t>(horizon) + 1, Eigen::Matrix2d::Zero());
  d[0].setIdentity();
  const int p = static_cast<int>(lag_matrices.size());
  for (int h = 1; h <= horizon; ++h) {
    for (int i = 1; i <= std::min(h, p); ++i) {
      d[static_cast<std::size_t>(h)] += lag_matrices[static_cast<std::size_t>(i - 1)] * d[static_cast<std::size_t>(h - i)];
    }
  }
  return d;
}

IrfSet irf_structural(const StructuralModel& svar, const VarModel& model, int horizon) {
  if (horizon < 12) throw Error(ErrorCode::invalid_argument, "irf horizon must be >= 12");
  IrfSet out;
  out.horizon = horizon;
  out.long_run = long_run_matrix(model) * svar.a0;
  const auto d = ma_matrices(model.lag_matrices, horizon);
  Eigen::Matrix2d cumulative = Eigen::Matrix2d::Zero();
  for (auto& per_shock : out.responses) {
    for (auto& series : per_shock) series.reserve(static_cast<std::size_t>(horizon) + 1);
  }
  for (int h = 0; h <= horizon; ++h) {
    cumulative += d[static_cast<std::size_t>(h)] * svar.a0;
    for (int s = 0; s < 2; ++s) {
      for (int v = 0; v < 2; ++v) {
        out.responses[static_cast<std::size_t>(s)][static_cast<std::size_t>(v)].push_back(cumulative(v, s));
      }
    }
  }
  return out;
}

SizeSpeed size_and_speed(const IrfSet& irf) {
  if (irf.horizon < 12) throw Error(ErrorCode::invalid_argument, "size_and_speed needs horizon >= 12");
  SizeSpeed out;
  out.supply_long_run = irf.long_run_value(Shock::supply, Variable::activity);
  out.demand_long_run = irf.long_run_value(Shock::demand, Variable::price);
  if (std::abs(out.supply_long_run) < 1e-12) throw Error(ErrorCode::zero_long_run, "supply -> activity long-run is zero");
  if (std::abs(out.demand_long_run) < 1e-12) throw Error(ErrorCode::zero_long_run, "demand -> price long-run is zero");
  out.supply_size = std::abs(out.supply_long_run);
  out.demand_size = std::abs(out.demand_long_run);
  out.supply_speed = irf.response(Shock::supply, Variable::activity)[12] / out.supply_long_run;
  out.demand_speed = irf.response(Shock::demand, Variable::price)[12] / out.demand_long_run;
  return out;
}

void write_shock_rows(std::ostream& out, const std::string& country, const StructuralModel& svar) {
  char a[40], b[40];
  for (Eigen::Index t = 0; t < svar.shocks.rows(); ++t) {
    std::snprintf(a, sizeof a, "%.15g", svar.shocks(t, 0));
    std::snprintf(b, sizeof b, "%.15g", svar.shocks(t, 1));
    out << country << ',' << svar.dates[static_cast<std::size_t>(t)].str() << ',' << a << ',' << b << '\n';
  }
}

}  // namespace oca
