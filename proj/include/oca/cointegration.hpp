#pragma once

#include <array>
#include <span>

namespace oca {

// 5% critical values for two variables with the linear trend restricted to
// the cointegrating space (Osterwald-Lenum), indexed by hypothesised rank.
inline constexpr std::array<double, 2> kJohansenTraceCv5 = {25.32, 12.25};
inline constexpr std::array<double, 2> kJohansenMaxEigCv5 = {18.96, 12.25};

struct JohansenResult {
  std::size_t nobs = 0;
  int lag_order = 0;
  // Descending, each in [0, 1).
  std::array<double, 2> eigenvalues{};
  // Index r tests H0: rank <= r.
  std::array<double, 2> trace_stats{};
  std::array<double, 2> max_eig_stats{};
  std::array<double, 2> critical_values_trace = kJohansenTraceCv5;
  std::array<double, 2> critical_values_maxeig = kJohansenMaxEigCv5;
  // Smallest r whose trace null is not rejected (2 if both are rejected).
  int selected_rank = 0;
};

// Johansen reduced-rank test on a bivariate system in levels.
//
// VECM with lag_order - 1 lagged differences, an unrestricted constant and a
// linear trend entering through the cointegrating relation. Eigenvalues come
// from |lambda S11 - S10 S00^{-1} S01| = 0 on the partialled-out residual
// moment matrices.
JohansenResult johansen_test(std::span<const double> first, std::span<const double> second, int lag_order);

}  // namespace oca
