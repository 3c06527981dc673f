#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace oca {

// Deterministic terms in the Dickey-Fuller regression.
enum class AdfSpec { none, constant, trend };

std::string_view to_string(AdfSpec spec);
AdfSpec parse_adf_spec(std::string_view text);

struct LagRule {
  enum class Kind { fixed, aic };
  Kind kind = Kind::aic;
  int lags = 0;  // used when kind == fixed

  static LagRule fixed(int k) { return {Kind::fixed, k}; }
  static LagRule aic() { return {Kind::aic, 0}; }
};

// Significance levels in the order critical values are stored.
inline constexpr std::array<double, 3> kAdfLevels = {0.01, 0.05, 0.10};

struct AdfResult {
  double statistic = 0.0;
  int lags_used = 0;
  AdfSpec spec = AdfSpec::trend;
  std::size_t nobs = 0;
  // 1%, 5%, 10%.
  std::array<double, 3> critical_values{};
  // Smallest level in kAdfLevels at which the unit root is rejected.
  std::optional<double> reject_at;

  bool rejects(double level) const { return reject_at && *reject_at <= level + 1e-12; }
};

// MacKinnon (2010) response-surface critical values for a single series,
// evaluated at `nobs` regression observations.
std::array<double, 3> adf_critical_values(AdfSpec spec, std::size_t nobs);

// Augmented Dickey-Fuller test of a unit root in `series`.
//
// Regression: dy_t = d_t + gamma * y_{t-1} + sum_{i=1..k} delta_i dy_{t-i} + u_t.
// Under LagRule::aic every k in 0..max_lags is fit on the common sample that
// the largest lag allows, the AIC minimiser is kept, and the chosen model is
// refit on all observations it can use.
AdfResult adf_test(std::span<const double> series, AdfSpec spec, int max_lags = 12,
                   LagRule rule = LagRule::aic());

struct IntegrationOrder {
  int order = 0;
  // One result per differencing level tested, starting at the level series.
  std::vector<AdfResult> trail;
};

// Smallest d <= max_order whose d-th difference rejects a unit root at 5%.
IntegrationOrder integration_order(std::span<const double> series, AdfSpec spec, int max_order = 2,
                                   int max_lags = 12, LagRule rule = LagRule::aic());

}  // namespace oca
