#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "oca/series_store.hpp"
#include "oca/synth_oracle.hpp"

using namespace oca;
using namespace oca::synth;

namespace {

Dgp identity_dgp(std::size_t t, std::uint64_t seed) {
  Dgp d;
  d.lag_matrices = {Eigen::Matrix2d::Zero()};
  d.t = t;
  d.seed = seed;
  return d;
}

}  // namespace

TEST_CASE("normal stream is the documented Box-Muller pair") {
  NormalStream a(7), b(7);
  std::mt19937_64 eng(7);
  auto u = [&] { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; };
  for (int i = 0; i < 5; ++i) {
    const double u1 = u(), u2 = u();
    const double r = std::sqrt(-2.0 * std::log(u1));
    CHECK(a.next() == r * std::cos(2.0 * std::numbers::pi * u2));
    CHECK(a.next() == r * std::sin(2.0 * std::numbers::pi * u2));
  }
  for (int i = 0; i < 1000; ++i) {
    const double v = b.uniform();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("identity DGP reproduces the raw draws") {
  const auto dgp = identity_dgp(200, 11);
  const auto sim = simulate(dgp);
  NormalStream rng(11);
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(kBurnIn + 200), 2);
  for (Eigen::Index t = 0; t < raw.rows(); ++t) {
    raw(t, 0) = rng.next();
    raw(t, 1) = rng.next();
  }
  CHECK(sim.data.values == raw.bottomRows(200));
  CHECK(sim.true_shocks == raw.bottomRows(200));
  CHECK(sim.data.dates.front() == dgp.start);
}

TEST_CASE("simulation is bit-reproducible") {
  const auto dgp = random_dgp(3, 500, 99);
  const auto a = simulate(dgp), b = simulate(dgp);
  CHECK(a.data.values == b.data.values);
  CHECK(a.true_shocks == b.true_shocks);
  const auto c = simulate(random_dgp(3, 500, 100));
  CHECK(a.data.values != c.data.values);

  const auto f1 = make_fixture(), f2 = make_fixture();
  std::ostringstream s1, s2;
  write_panel(s1, f1.panel);
  write_panel(s2, f2.panel);
  CHECK(s1.str() == s2.str());
}

TEST_CASE("reduced-form covariance converges to a0 a0'") {
  const std::vector<Eigen::Matrix2d> b = {(Eigen::Matrix2d() << 0.4, 0.1, -0.1, 0.3).finished(),
                                          (Eigen::Matrix2d() << 0.1, 0.0, 0.05, 0.1).finished()};
  const auto dgp = Dgp::from_long_run(b, (Eigen::Matrix2d() << 1.8, 0.0, -0.6, 2.0).finished(), Eigen::Vector2d(0.1, 0.2), 100000, 5);
  const auto sim = simulate(dgp);
  // u_t recovered from the true recursion.
  const auto& x = sim.data.values;
  Eigen::MatrixXd u(x.rows() - 2, 2);
  for (Eigen::Index t = 2; t < x.rows(); ++t) {
    const Eigen::Vector2d ut = x.row(t).transpose() - dgp.intercept - dgp.lag_matrices[0] * x.row(t - 1).transpose() -
                               dgp.lag_matrices[1] * x.row(t - 2).transpose();
    u.row(t - 2) = ut.transpose();
  }
  const Eigen::MatrixXd centered = u.rowwise() - u.colwise().mean();
  const Eigen::Matrix2d cov = centered.transpose() * centered / static_cast<double>(u.rows() - 1);
  CHECK((cov - dgp.a0_true * dgp.a0_true.transpose()).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("generated DGPs respect the identifying restriction") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto d = random_dgp(1 + static_cast<int>(seed % 3), 100, seed);
    CHECK_NOTHROW(d.validate());
    CHECK(std::abs(d.long_run()(0, 1)) < 1e-12);
    CHECK(stability(d.lag_matrices).max_modulus() <= 0.8 + 1e-12);
  }
}

TEST_CASE("recovery report") {
  const auto dgp = random_dgp(2, 300, 21);
  const auto sim = simulate(dgp);
  StructuralModel truth;
  truth.a0 = dgp.a0_true;
  truth.long_run = dgp.long_run();
  truth.shocks = sim.true_shocks;
  truth.dates = sim.data.dates;
  const auto perfect = recovery_report(sim, dgp, truth);
  CHECK(perfect.a0_error_max == 0.0);
  CHECK(perfect.shock_correlations[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(perfect.shock_correlations[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(perfect.sign_agreement);

  // Same model with the shock labels exchanged.
  StructuralModel swapped = truth;
  swapped.a0.col(0).swap(swapped.a0.col(1));
  swapped.long_run.col(0).swap(swapped.long_run.col(1));
  swapped.shocks.col(0).swap(swapped.shocks.col(1));
  const auto bad = recovery_report(sim, dgp, swapped);
  CHECK_FALSE(bad.sign_agreement);
  CHECK(bad.a0_error_max > 0.0);

  // A fitted model sees p fewer dates; the overlap is aligned by date.
  const auto fitted = identify_bq(fit_var(sim.data, 2));
  const auto rec = recovery_report(dgp, fitted);
  CHECK(rec.shock_correlations[0] > 0.8);

  StructuralModel shifted = truth;
  for (auto& d : shifted.dates) d = d.plus(1000);
  CHECK_ERROR_CODE(recovery_report(sim, dgp, shifted), ErrorCode::calendar_mismatch);
}

TEST_CASE("DGP validation") {
  Dgp unstable = identity_dgp(100, 1);
  unstable.lag_matrices = {Eigen::Matrix2d::Identity() * 1.01};
  CHECK_ERROR_CODE(simulate(unstable), ErrorCode::unstable_dgp);
  Dgp unrestricted = identity_dgp(100, 1);
  unrestricted.lag_matrices = {(Eigen::Matrix2d() << 0.5, 0.2, 0.0, 0.3).finished()};
  CHECK_ERROR_CODE(simulate(unrestricted), ErrorCode::invalid_dgp);
  Dgp negative = identity_dgp(100, 1);
  negative.a0_true = -Eigen::Matrix2d::Identity();
  CHECK_ERROR_CODE(simulate(negative), ErrorCode::invalid_dgp);
  CHECK_ERROR_CODE(simulate(identity_dgp(0, 1)), ErrorCode::invalid_dgp);
  CHECK_ERROR_CODE(simulate_with_shocks(identity_dgp(10, 1), Eigen::MatrixXd::Zero(10, 2)), ErrorCode::invalid_argument);
}

TEST_CASE("fixture panel") {
  const auto f = make_fixture();
  CHECK(f.panel.countries().size() == 7);
  CHECK(f.panel.dates().size() == 133);
  CHECK(f.panel.dates().front() == YearMonth{2009, 1});
  std::ostringstream out;
  write_panel(out, f.panel);
  std::ifstream bundled(OCA_DATA_DIR "/fixture_panel.csv");
  std::stringstream file;
  file << bundled.rdbuf();
  CHECK(out.str() == file.str());
}
