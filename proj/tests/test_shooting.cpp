#include <doctest.h>

#include <cmath>

#include "nlkg/errors.hpp"
#include "nlkg/shooting.hpp"

using namespace nlkg;

namespace {
const PowerPair k35{3.0, 5.0};

const SpectralData& sd() {
  static SpectralData s = compute_spectral_data(k35, GridSpec{40.0, 1024});
  return s;
}

ShootSpec single(double horizon) {
  ShootSpec s;
  s.pp = k35;
  s.signs = {1};
  s.speeds = {0.0};
  s.centers = {0.0};
  s.grid = {horizon + 25.0, 1024};
  s.horizon = horizon;
  s.evolve.t_end = horizon;
  return s;
}

ShootSpec pair() {
  ShootSpec s;
  s.pp = k35;
  s.signs = {1, -1};
  s.speeds = {-0.3, 0.3};
  s.centers = {-20.5, 20.5};
  s.L = 40.0;
  s.grid = {60.0, 1024};
  s.horizon = 10.0;
  return s;
}
}  // namespace

TEST_CASE("spec validation and radii") {
  ShootSpec s = pair();
  CHECK_NOTHROW(validate(s));
  const double g0 = exponent_constants(k35).gamma0;
  CHECK(tube_radius(s) == doctest::Approx(10.0 * (1e-3 + std::exp(-40.0 * g0))));
  CHECK(ball_radius(s) == doctest::Approx(std::sqrt(1e-6 + std::exp(-80.0 * g0))));
  s.ball_radius = 0.02;
  CHECK(ball_radius(s) == 0.02);
  ShootSpec one = single(10.0);
  CHECK(separation_term(one) == 0.0);
  CHECK(tube_radius(one) == doctest::Approx(1e-2));
  one.delta = 0.0;
  CHECK(tube_radius(one) == doctest::Approx(1e-2));  // floor
  CHECK(ball_radius(one) == doctest::Approx(1e-3));

  ShootSpec bad = pair();
  bad.delta = 0.1;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = pair();
  bad.centers = {-15.0, 15.0};
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = pair();
  bad.horizon = 40.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);  // grid too small
  bad = pair();
  bad.speeds = {0.3, -0.3};
  CHECK_THROWS_AS(validate(bad), ValidationError);
  bad = pair();
  bad.search.lookahead = 1.0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("seeded perturbation") {
  const ShootSpec s = pair();
  Fourier F(s.grid);
  const State a = make_perturbation(s), b = make_perturbation(s);
  CHECK(h_norm(a, F) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK((a.u1 - b.u1).cwiseAbs().maxCoeff() == 0.0);
  ShootSpec t = s;
  t.seed = 2;
  CHECK((make_perturbation(t).u1 - a.u1).cwiseAbs().maxCoeff() > 1e-6);
  // smooth envelope: negligible near the seam
  CHECK(std::fabs(a.u1[0]) <= 1e-12);
  ShootSpec z = s;
  z.delta = 0.0;
  CHECK(make_perturbation(z).u1.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initial-data adjustment") {
  SUBCASE("no perturbation, zero target") {
    ShootSpec s = pair();
    s.delta = 0.0;
    Shooter sh(sd(), s);
    const PreparedData p = sh.prepare_initial_data({0.0, 0.0});
    for (int n = 0; n < 2; ++n) {
      CHECK(std::fabs(p.h_plus[n]) <= 1e-14);
      CHECK(std::fabs(p.y_tilde[n] - s.centers[n]) <= 1e-12);
    }
  }
  SUBCASE("small perturbation") {
    const ShootSpec s = pair();
    Shooter sh(sd(), s);
    const double scale = s.delta + separation_term(s);
    for (const std::vector<double>& target : {std::vector<double>{0.0, 0.0}, std::vector<double>{2e-3, -1e-3}}) {
      const PreparedData p = sh.prepare_initial_data(target);
      double shift = 0.0;
      for (int n = 0; n < 2; ++n) shift += std::fabs(p.h_plus[n]) + std::fabs(p.y_tilde[n] - s.centers[n]);
      MESSAGE("adjustment / (delta + e^{-g0 L}) = " << shift / scale);
      if (target[0] == 0.0) CHECK(shift <= 1.0 * scale);
      CHECK(p.residual <= 1e-10);
      ModulationFrame f = sh.decomposer().decompose(p.u0, s.centers);
      for (int n = 0; n < 2; ++n) {
        CHECK(std::fabs(f.a_plus[n] - target[n]) <= 1e-9);
        CHECK(std::fabs(f.orthogonality[n]) <= 1e-10);
        CHECK(std::fabs(f.y[n] - p.y_tilde[n]) <= 1e-9);
      }
    }
    CHECK_THROWS_AS(sh.prepare_initial_data({50.0, 0.0}), NewtonDiverged);
  }
}

TEST_CASE("offset controls exit with the unstable mode dominant") {
  const ShootSpec s = pair();
  Shooter sh(sd(), s);
  const double r = sh.ball();
  for (double sgn : {1.0, -1.0}) {
    const PreparedData p = sh.prepare_initial_data({sgn * 10.0 * r, 0.0});
    State at_exit;
    const RunOutcome o = sh.run(p.u0, p.y_tilde, s.horizon, false, [&](const State& st, const ModulationFrame&) {
      at_exit = st;
    });
    CHECK_FALSE(o.reached_limit);
    CHECK(o.reason == ExitReason::tube);
    CHECK(o.exit_signs[0] == static_cast<int>(sgn));
    const ModulationFrame& last = o.frames.back();
    CHECK(std::fabs(last.a_plus[0]) > std::fabs(last.a_plus[1]));
    const DominanceReport d = exit_dominance(sh.decomposer(), at_exit, last);
    MESSAGE("exit t = " << o.exit_time << " unstable " << d.unstable << " perp " << d.phi_perp);
    CHECK(d.dominant);
    CHECK(d.unstable >= 5.0 * d.phi_perp);
  }
  // starting inside the ball, b = sum (a+)^2 leaves it with positive speed
  const PreparedData p = sh.prepare_initial_data({0.5 * r, 0.0});
  const RunOutcome o = sh.run(p.u0, p.y_tilde, s.horizon);
  const auto rate = transversality_rate(o.frames, r * r);
  REQUIRE(rate.has_value());
  CHECK(*rate > 0.0);
}

TEST_CASE("single-soliton shooting") {
  const ShootSpec s = single(12.0);
  Shooter sh(sd(), s);
  const ShootResult res = sh.shoot();
  CHECK(res.reached_horizon);
  CHECK(res.exit_time == 12.0);
  CHECK(res.sup_phi_norm <= res.tube);
  REQUIRE(!res.segments.empty());
  const SegmentRecord& s0 = res.segments.front();
  CHECK(s0.bracket_width[0] <= 1e-12);
  CHECK(res.single_trajectory_exit >= s.search.segment);
  CHECK(res.trajectory.front().t == 0.0);
  CHECK(res.trajectory.back().t == doctest::Approx(12.0));
  for (std::size_t k = 1; k < res.trajectory.size(); ++k) CHECK(res.trajectory[k].t > res.trajectory[k - 1].t);
  MESSAGE("ydot ratio " << ydot_bound_ratio(res.trajectory, s) << " max kick " << res.max_kick);
  CHECK(ydot_bound_ratio(res.trajectory, s) <= 1.0);

  // exit sign is monotone in the segment-0 target across the root
  const double w = 1e-9;
  int prev = -2;
  for (int i = -8; i < 8; ++i) {
    const double v = res.a_plus_target[0] + (i + 0.5) * w;
    const PreparedData p = sh.prepare_initial_data({v});
    const RunOutcome o = sh.run(p.u0, p.y_tilde, s.horizon, true);
    REQUIRE(o.exit_signs[0] != 0);
    CHECK(o.exit_signs[0] >= prev);
    prev = o.exit_signs[0];
  }
}

TEST_CASE("frame helpers") {
  std::vector<ModulationFrame> fr(5);
  for (int k = 0; k < 5; ++k) {
    fr[k].t = 0.1 * k;
    fr[k].a_plus = {std::exp(k * 1.0)};  // b = e^{2k}
    fr[k].y = {0.1 * k * 0.5};
  }
  const auto r = transversality_rate(fr, std::exp(3.0));
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx((std::exp(4.0) - std::exp(2.0)) / 0.1));
  CHECK_FALSE(transversality_rate(fr, 1e9).has_value());
  ShootSpec s = single(10.0);
  s.speeds = {0.5};
  CHECK(ydot_bound_ratio(fr, s) == doctest::Approx(0.0).scale(1e-12));
}
