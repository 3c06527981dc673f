#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oca/calendar.hpp"
#include "oca/series_store.hpp"
#include "oca/svar_id.hpp"
#include "oca/var_engine.hpp"

namespace oca::synth {

inline constexpr std::size_t kBurnIn = 500;

// Standard normal stream: mt19937_64, 53-bit uniforms on (0, 1), and the
// Box-Muller transform emitting the cosine variate first, then the sine.
// Fixtures depend on this exact sequence.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double next();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Bivariate data-generating process whose impact matrix satisfies the
// long-run restriction.
struct Dgp {
  std::vector<Eigen::Matrix2d> lag_matrices;
  Eigen::Matrix2d a0_true = Eigen::Matrix2d::Identity();
  Eigen::Vector2d intercept = Eigen::Vector2d::Zero();
  std::size_t t = 0;
  std::uint64_t seed = 0;
  // Date of the first kept observation.
  YearMonth start{2009, 2};

  // Builds a0_true = (I - sum B) * long_run for a lower-triangular long_run.
  static Dgp from_long_run(std::vector<Eigen::Matrix2d> lag_matrices, const Eigen::Matrix2d& long_run,
                           Eigen::Vector2d intercept, std::size_t t, std::uint64_t seed);

  Eigen::Matrix2d long_run() const;
  // Throws unstable_dgp / invalid_dgp.
  void validate() const;
};

struct Simulation {
  VarData data;                // t x 2 series in differences
  Eigen::MatrixXd true_shocks; // t x 2, (supply, demand)

  TransformedSeries activity(const std::string& country = "SYN") const;
  TransformedSeries price(const std::string& country = "SYN") const;
};

Simulation simulate(const Dgp& dgp);
// Same recursion driven by caller-supplied shocks with kBurnIn + t rows.
Simulation simulate_with_shocks(const Dgp& dgp, const Eigen::MatrixXd& shocks);

struct RecoveryMetrics {
  double a0_error_max = 0.0;
  std::array<double, 2> shock_correlations{};
  bool sign_agreement = false;
};

RecoveryMetrics recovery_report(const Simulation& truth, const Dgp& dgp, const StructuralModel& fitted);
// Regenerates the truth from the DGP's seed.
RecoveryMetrics recovery_report(const Dgp& dgp, const StructuralModel& fitted);

// Random stable VAR(p) DGP: companion modulus <= max_modulus, long-run matrix
// lower triangular with diagonal in [0.5, 1.5].
Dgp random_dgp(int p, std::size_t t, std::uint64_t seed, double max_modulus = 0.8);

// Country panel in index levels (base 100 at `start`), built from per-country
// DGPs that share a fraction of their structural shocks.
struct FixtureOptions {
  std::vector<std::string> countries = {"CRI", "DOM", "GTM", "HND", "NIC", "PAN", "SLV"};
  std::size_t months = 133;
  YearMonth start{2009, 1};
  std::uint64_t seed = 42;
  // Share of each structural shock's variance that is common to all countries.
  double common_share = 0.2;
};

struct Fixture {
  Panel panel;
  std::vector<Dgp> dgps;
  std::vector<Simulation> simulations;
};

// Per-country DGP used by the fixture generator.
Dgp fixture_dgp(std::size_t country_index, std::size_t t, std::uint64_t seed, YearMonth start);
Fixture make_fixture(const FixtureOptions& options = {});

}  // namespace oca::synth
