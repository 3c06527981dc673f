#include "oca/synth_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oca/error.hpp"
#include "oca/stats.hpp"

namespace oca::synth {

double NormalStream::uniform() {
  // 53 random bits, offset by half a step so the value is never 0 or 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform(), u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Dgp Dgp::from_long_run(std::vector<Eigen::Matrix2d> lag_matrices, const Eigen::Matrix2d& long_run,
                       Eigen::Vector2d intercept, std::size_t t, std::uint64_t seed) {
  Dgp d;
  d.lag_matrices = std::move(lag_matrices);
  Eigen::Matrix2d lr = long_run;
  lr(0, 1) = 0.0;
  Eigen::Matrix2d ib = Eigen::Matrix2d::Identity();
  for (const auto& b : d.lag_matrices) ib -= b;
  d.a0_true = ib * lr;
  d.intercept = intercept;
  d.t = t;
  d.seed = seed;
  return d;
}

Eigen::Matrix2d Dgp::long_run() const {
  Eigen::Matrix2d ib = Eigen::Matrix2d::Identity();
  for (const auto& b : lag_matrices) ib -= b;
  return ib.inverse() * a0_true;
}

void Dgp::validate() const {
  if (t == 0) throw Error(ErrorCode::invalid_dgp, "DGP sample length is zero");
  if (lag_matrices.empty()) return;
  const auto st = stability(lag_matrices);
  if (!st.stable) throw Error(ErrorCode::unstable_dgp, "DGP companion modulus " + std::to_string(st.max_modulus()) + " >= 1");
  const Eigen::Matrix2d f = long_run();
  if (std::abs(f(0, 1)) > 1e-12) throw Error(ErrorCode::invalid_dgp, "D(1) a0 is not lower triangular");
  if (!(f(0, 0) > 0.0) || !(f(1, 1) > 0.0)) throw Error(ErrorCode::invalid_dgp, "D(1) a0 diagonal must be positive");
}

TransformedSeries Simulation::activity(const std::string& country) const {
  TransformedSeries s{country, Variable::activity, data.dates, {}};
  s.values.assign(data.values.col(0).data(), data.values.col(0).data() + data.values.rows());
  return s;
}

TransformedSeries Simulation::price(const std::string& country) const {
  TransformedSeries s{country, Variable::price, data.dates, {}};
  s.values.assign(data.values.col(1).data(), data.values.col(1).data() + data.values.rows());
  return s;
}

Simulation simulate_with_shocks(const Dgp& dgp, const Eigen::MatrixXd& shocks) {
  dgp.validate();
  const auto total = static_cast<Eigen::Index>(kBurnIn + dgp.t);
  if (shocks.rows() != total || shocks.cols() != 2) {
    throw Error(ErrorCode::invalid_argument, "shock matrix must have burn-in + t rows and 2 columns");
  }
  const auto p = static_cast<Eigen::Index>(dgp.lag_matrices.size());
  // Start the recursion at the unconditional mean.
  Eigen::Vector2d mean = dgp.intercept;
  if (p > 0) {
    Eigen::Matrix2d ib = Eigen::Matrix2d::Identity();
    for (const auto& b : dgp.lag_matrices) ib -= b;
    mean = ib.inverse() * dgp.intercept;
  }
  Eigen::MatrixXd x(total, 2);
  for (Eigen::Index t = 0; t < total; ++t) {
    Eigen::Vector2d v = dgp.intercept + dgp.a0_true * shocks.row(t).transpose();
    for (Eigen::Index i = 1; i <= p; ++i) {
      const Eigen::Vector2d lagged = t - i >= 0 ? Eigen::Vector2d(x.row(t - i).transpose()) : mean;
      v += dgp.lag_matrices[static_cast<std::size_t>(i - 1)] * lagged;
    }
    x.row(t) = v.transpose();
  }
  Simulation sim;
  sim.data.dates = make_calendar(dgp.start, dgp.t);
  sim.data.values = x.bottomRows(static_cast<Eigen::Index>(dgp.t));
  sim.true_shocks = shocks.bottomRows(static_cast<Eigen::Index>(dgp.t));
  return sim;
}

Simulation simulate(const Dgp& dgp) {
  dgp.validate();
  NormalStream rng(dgp.seed);
  const auto total = static_cast<Eigen::Index>(kBurnIn + dgp.t);
  Eigen::MatrixXd shocks(total, 2);
  for (Eigen::Index t = 0; t < total; ++t) {
    shocks(t, 0) = rng.next();
    shocks(t, 1) = rng.next();
  }
  return simulate_with_shocks(dgp, shocks);
}

RecoveryMetrics recovery_report(const Simulation& truth, const Dgp& dgp, const StructuralModel& fitted) {
  if (fitted.dates.empty() || fitted.shocks.rows() != static_cast<Eigen::Index>(fitted.dates.size())) {
    throw Error(ErrorCode::calendar_mismatch, "fitted shocks have no calendar");
  }
  const long offset = calendar_position(truth.data.dates, fitted.dates.front());
  if (offset < 0 || calendar_position(truth.data.dates, fitted.dates.back()) < 0 ||
      fitted.dates.back().index() - fitted.dates.front().index() + 1 != static_cast<int>(fitted.dates.size())) {
    throw Error(ErrorCode::calendar_mismatch, "fitted shock dates are not inside the simulated calendar");
  }
  RecoveryMetrics m;
  m.a0_error_max = (fitted.a0 - dgp.a0_true).cwiseAbs().maxCoeff();
  const auto n = static_cast<std::size_t>(fitted.shocks.rows());
  for (int s = 0; s < 2; ++s) {
    const Eigen::VectorXd est = fitted.shocks.col(s);
    const Eigen::VectorXd tru = truth.true_shocks.col(s).segment(offset, static_cast<Eigen::Index>(n));
    m.shock_correlations[static_cast<std::size_t>(s)] = stats::pearson({est.data(), n}, {tru.data(), n});
  }
  const Eigen::Matrix2d f_true = dgp.long_run();
  m.sign_agreement = (fitted.long_run(0, 0) > 0.0) == (f_true(0, 0) > 0.0) &&
                     (fitted.long_run(1, 1) > 0.0) == (f_true(1, 1) > 0.0) && fitted.long_run(0, 0) != 0.0 &&
                     fitted.long_run(1, 1) != 0.0;
  return m;
}

RecoveryMetrics recovery_report(const Dgp& dgp, const StructuralModel& fitted) {
  return recovery_report(simulate(dgp), dgp, fitted);
}

Dgp random_dgp(int p, std::size_t t, std::uint64_t seed, double max_modulus) {
  if (p < 1) throw Error(ErrorCode::invalid_argument, "random_dgp: p must be >= 1");
  // Parameters come from a stream decorrelated from the shock stream.
  NormalStream rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<Eigen::Matrix2d> b(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    const double scale = 0.35 / (i + 1);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) b[static_cast<std::size_t>(i)](r, c) = scale * rng.next();
  }
  const double modulus = stability(b).max_modulus();
  if (modulus > max_modulus) {
    // Scaling B_i by c^i scales every companion eigenvalue by c.
    const double c = max_modulus / modulus;
    double ci = 1.0;
    for (auto& bi : b) {
      ci *= c;
      bi *= ci;
    }
  }
  Eigen::Matrix2d f;
  f << 0.5 + rng.uniform(), 0.0, rng.uniform() - 0.5, 0.5 + rng.uniform();
  Eigen::Vector2d mu(0.1 * rng.next(), 0.1 * rng.next());
  return Dgp::from_long_run(std::move(b), f, mu, t, seed);
}

Dgp fixture_dgp(std::size_t country_index, std::size_t t, std::uint64_t seed, YearMonth start) {
  NormalStream rng(seed * 1000003ULL + country_index);
  const double jitter = 0.1 * rng.next();
  Eigen::Matrix2d b1, b2;
  b1 << 0.25 + jitter, 0.05, 0.03, 0.35 - jitter;
  b2 << 0.10, 0.0, 0.02, 0.15;
  // Monthly growth around 0.3% (activity) and 0.4% (prices).
  Eigen::Matrix2d f;
  f << 0.02 * (1.0 + 0.2 * rng.next()), 0.0, -0.003 * (1.0 + 0.2 * rng.next()), 0.006 * (1.0 + 0.2 * rng.next());
  std::vector<Eigen::Matrix2d> b = {b1, b2};
  Eigen::Matrix2d ib = Eigen::Matrix2d::Identity() - b1 - b2;
  Eigen::Vector2d intercept = ib * Eigen::Vector2d(0.003, 0.004);
  Dgp d = Dgp::from_long_run(std::move(b), f, intercept, t, seed + country_index);
  d.start = start;
  return d;
}

Fixture make_fixture(const FixtureOptions& options) {
  if (options.months < 2) throw Error(ErrorCode::invalid_argument, "fixture needs at least 2 months");
  if (!(options.common_share >= 0.0 && options.common_share < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "common_share must be in [0, 1)");
  }
  const std::size_t t = options.months - 1;
  const auto total = static_cast<Eigen::Index>(kBurnIn + t);
  NormalStream common_rng(options.seed);
  Eigen::MatrixXd common(total, 2);
  for (Eigen::Index r = 0; r < total; ++r) {
    common(r, 0) = common_rng.next();
    common(r, 1) = common_rng.next();
  }
  const double a = std::sqrt(options.common_share), b = std::sqrt(1.0 - options.common_share);

  std::vector<std::string> countries = options.countries;
  std::sort(countries.begin(), countries.end());
  std::vector<Dgp> dgps;
  std::vector<Simulation> sims;
  std::vector<Panel::Pair> levels;
  for (std::size_t c = 0; c < countries.size(); ++c) {
    Dgp dgp = fixture_dgp(c, t, options.seed, options.start.next());
    NormalStream own(dgp.seed);
    Eigen::MatrixXd shocks(total, 2);
    for (Eigen::Index r = 0; r < total; ++r) {
      shocks(r, 0) = a * common(r, 0) + b * own.next();
      shocks(r, 1) = a * common(r, 1) + b * own.next();
    }
    Simulation sim = simulate_with_shocks(dgp, shocks);
    Panel::Pair pair;
    for (int v = 0; v < 2; ++v) {
      auto& col = pair[static_cast<std::size_t>(v)];
      col.reserve(options.months);
      double log_level = std::log(100.0);
      col.push_back(100.0);
      for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(t); ++r) {
        log_level += sim.data.values(r, v);
        col.push_back(std::exp(log_level));
      }
    }
    levels.push_back(std::move(pair));
    dgps.push_back(std::move(dgp));
    sims.push_back(std::move(sim));
  }
  return Fixture{Panel(countries, make_calendar(options.start, options.months), std::move(levels)), std::move(dgps),
                 std::move(sims)};
}

}  // namespace oca::synth
