#include <doctest.h>

#include <cmath>
#include <random>

#include "nlkg/errors.hpp"
#include "nlkg/nonlinearity.hpp"

using namespace nlkg;

namespace {
// s0 for (3,5): F(s) = s^2/2 reduces to 2u^2 - 3u - 6 = 0 with u = s^2.
const double kS0_35 = std::sqrt((3.0 + std::sqrt(57.0)) / 4.0);
// s0 for (2,3): 3s^2 - 4s - 6 = 0.
const double kS0_23 = (2.0 + std::sqrt(22.0)) / 3.0;
const PowerPair k35{3.0, 5.0};
const PowerPair k23{2.0, 3.0};

double bisect_s0(const PowerPair& pp) {
  double lo = 1e-3, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    double m = 0.5 * (lo + hi);
    double g = std::pow(m, pp.p + 1) / (pp.p + 1) - std::pow(m, pp.q + 1) / (pp.q + 1) - 0.5 * m * m;
    (g > 0 ? hi : lo) = m;
  }
  return lo;
}
}  // namespace

TEST_CASE("f, F, f' at listed points") {
  CHECK(eval_f(0.0, k35) == 0.0);
  CHECK(eval_f(1.0, k35) == 0.0);
  CHECK(eval_F(0.0, k35) == 0.0);
  CHECK(eval_F(1.0, k35) == doctest::Approx(-1.0 / 12.0).epsilon(1e-15));
  CHECK(eval_fprime(0.0, k35) == 0.0);
  CHECK(eval_fprime(1.0, k35) == 2.0);
  CHECK(eval_f(kS0_35, k35) - kS0_35 > 0.0);
}

TEST_CASE("non-integer exponents") {
  PowerPair pp{1.5, 2.7};
  const double s = -0.8;
  CHECK(eval_f(s, pp) == doctest::Approx(std::pow(0.8, 1.7) * s - std::pow(0.8, 0.5) * s).epsilon(1e-14));
  CHECK(eval_F(0.0, pp) == 0.0);
  CHECK(std::isfinite(eval_fprime(0.0, pp)));
}

TEST_CASE("parity") {
  for (double s : {0.01, 0.3, 1.0, 1.7, 4.2}) {
    for (const auto& pp : {k35, k23, PowerPair{1.5, 2.7}}) {
      CHECK(eval_f(-s, pp) == -eval_f(s, pp));
      CHECK(eval_F(-s, pp) == eval_F(s, pp));
      CHECK(eval_fprime(-s, pp) == eval_fprime(s, pp));
    }
  }
}

TEST_CASE("F' = f and f' by central differences") {
  const double h = 1e-5;
  for (double s : {-2.3, -0.7, 0.4, 1.1, 2.9}) {
    for (const auto& pp : {k35, k23, PowerPair{1.5, 2.7}}) {
      double dF = (eval_F(s + h, pp) - eval_F(s - h, pp)) / (2 * h);
      double df = (eval_f(s + h, pp) - eval_f(s - h, pp)) / (2 * h);
      CHECK(std::fabs(dF - eval_f(s, pp)) <= 1e-8 * std::max(1.0, std::fabs(eval_f(s, pp))));
      CHECK(std::fabs(df - eval_fprime(s, pp)) <= 1e-8 * std::max(1.0, std::fabs(eval_fprime(s, pp))));
    }
  }
}

TEST_CASE("defocusing combination closed form") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-10.0, 10.0);
  for (const auto& pp : {k35, k23, PowerPair{1.5, 2.7}}) {
    for (int i = 0; i < 2000; ++i) {
      const double s = U(rng);
      const double a = std::fabs(s);
      const double closed = -((pp.q - 1) / (pp.q + 1)) * std::pow(a, pp.q + 1) +
                            ((pp.p - 1) / (pp.p + 1)) * std::pow(a, pp.p + 1);
      const double got = defocusing_combination(s, pp);
      const double scale = std::max({std::fabs(closed), std::pow(a, pp.q + 1), std::pow(a, pp.p + 1)});
      CHECK(std::fabs(got - closed) <= 1e-13 * scale);
    }
  }
  CHECK(defocusing_combination(0.0, k35) == 0.0);
  CHECK(defocusing_combination(0.1, k35) < 0.0);
  CHECK(defocusing_combination(10.0, k35) > 0.0);
}

TEST_CASE("s0") {
  CHECK(find_s0(k35) == doctest::Approx(kS0_35).epsilon(1e-14));
  CHECK(find_s0(k23) == doctest::Approx(kS0_23).epsilon(1e-14));
  CHECK(find_s0(k35) == doctest::Approx(bisect_s0(k35)).epsilon(1e-12));
  for (const auto& pp : {k35, k23, PowerPair{1.5, 2.7}, PowerPair{2.0, 7.0}}) {
    const double s0 = find_s0(pp);
    CHECK(std::fabs(eval_F(s0, pp) - 0.5 * s0 * s0) <= 1e-14 * s0 * s0);
    for (double frac : {0.1, 0.25, 0.5, 0.75, 0.99}) {
      const double s = frac * s0;
      CHECK(eval_F(s, pp) - 0.5 * s * s < 0.0);
    }
  }
}

TEST_CASE("identity at s0") {
  for (const auto& pp : {k35, k23, PowerPair{1.5, 2.7}, PowerPair{2.0, 7.0}}) {
    const double s0 = find_s0(pp);
    const double lhs = eval_f(s0, pp) - s0;
    const double rhs =
        ((pp.p - pp.q) / (pp.q + 1) * std::pow(s0, pp.q + 1) + 0.5 * (pp.p - 1) * s0 * s0) / s0;
    CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::fabs(rhs));
    CHECK(lhs > 0.0);
  }
}

TEST_CASE("exponent constants") {
  auto c = exponent_constants(k35);
  CHECK(c.q_star == 1.0);
  CHECK(c.p_star == 3.0);
  CHECK(c.gamma0 == 0.125);
  auto d = exponent_constants(k23);
  CHECK(d.q_star == 0.5);
  CHECK(d.p_star == 1.0);
  CHECK(d.gamma0 == 0.0625);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(PowerPair{1.0, 3.0}), ValidationError);
  CHECK_THROWS_AS(validate(PowerPair{3.0, 3.0}), ValidationError);
  CHECK_THROWS_AS(validate(PowerPair{5.0, 3.0}), ValidationError);
  CHECK_THROWS_AS(find_s0(PowerPair{2.0, INFINITY}), ValidationError);
}
