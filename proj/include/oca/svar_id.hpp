#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oca/calendar.hpp"
#include "oca/var_engine.hpp"

namespace oca {

// Structural shock order: supply first, demand second.
enum class Shock { supply = 0, demand = 1 };
std::string_view to_string(Shock s);
Shock parse_shock(std::string_view text);

// Largest companion modulus accepted before D(1) is considered unreliable.
inline constexpr double kMaxStableModulus = 0.9999;

// Long-run restricted structural model. Residuals u_t = a0 * e_t with
// e_t = (supply_t, demand_t) orthonormal, and long_run = D(1) * a0 lower
// triangular with a positive diagonal.
struct StructuralModel {
  Eigen::Matrix2d a0 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d long_run = Eigen::Matrix2d::Identity();
  Eigen::MatrixXd shocks;  // n x 2, columns (supply, demand)
  Calendar dates;
};

// (I - B_1 - ... - B_p)^{-1}. Throws unstable_model when the model has a
// companion modulus above kMaxStableModulus or I - sum(B) is ill conditioned.
Eigen::Matrix2d long_run_matrix(const VarModel& model);
Eigen::Matrix2d long_run_matrix(std::span<const Eigen::Matrix2d> lag_matrices);

// Blanchard-Quah identification of a fitted bivariate VAR.
StructuralModel identify_bq(const VarModel& model);

// Cumulative structural level responses. responses[shock][variable] has
// horizon + 1 entries r_0..r_horizon; long_run[shock][variable] = F(variable, shock).
struct IrfSet {
  int horizon = 0;
  std::array<std::array<std::vector<double>, 2>, 2> responses;
  Eigen::Matrix2d long_run = Eigen::Matrix2d::Zero();

  const std::vector<double>& response(Shock s, Variable v) const {
    return responses[static_cast<std::size_t>(s)][static_cast<std::size_t>(v)];
  }
  double long_run_value(Shock s, Variable v) const {
    return long_run(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(s));
  }
};

// MA matrices D_h of the reduced form (D_0 = I).
std::vector<Eigen::Matrix2d> ma_matrices(std::span<const Eigen::Matrix2d> lag_matrices, int horizon);

IrfSet irf_structural(const StructuralModel& svar, const VarModel& model, int horizon);

struct SizeSpeed {
  double supply_size = 0.0;   // |long-run activity response to supply|
  double demand_size = 0.0;   // |long-run price response to demand|
  double supply_speed = 0.0;  // r_12 / long-run, activity to supply
  double demand_speed = 0.0;  // r_12 / long-run, price to demand
  // Signed long-run values behind the sizes.
  double supply_long_run = 0.0;
  double demand_long_run = 0.0;
};

SizeSpeed size_and_speed(const IrfSet& irf);

// `country,date,supply_shock,demand_shock` rows, 15 significant digits.
void write_shock_rows(std::ostream& out, const std::string& country, const StructuralModel& svar);

}  // namespace oca
