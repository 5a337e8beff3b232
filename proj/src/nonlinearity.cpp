#include "nlkg/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlkg/errors.hpp"

namespace nlkg {

void validate(const PowerPair& pp) {
  if (!std::isfinite(pp.q) || !std::isfinite(pp.p) || !(1.0 < pp.q) || !(pp.q < pp.p)) {
    throw ValidationError("exponents must satisfy 1 < q < p < inf (got q=" + std::to_string(pp.q) +
                          ", p=" + std::to_string(pp.p) + ")");
  }
}

double abs_pow(double s, double a) {
  const double m = std::fabs(s);
  if (m == 0.0) return 0.0;
  if (a == std::floor(a) && a >= 0.0 && a <= 64.0) {
    auto n = static_cast<unsigned>(a);
    double base = m, r = 1.0;
    while (n) {
      if (n & 1u) r *= base;
      base *= base;
      n >>= 1u;
    }
    return r;
  }
  return std::exp(a * std::log(m));
}

double eval_f(double s, const PowerPair& pp) {
  return (abs_pow(s, pp.p - 1.0) - abs_pow(s, pp.q - 1.0)) * s;
}

double eval_F(double s, const PowerPair& pp) {
  return abs_pow(s, pp.p + 1.0) / (pp.p + 1.0) - abs_pow(s, pp.q + 1.0) / (pp.q + 1.0);
}

double eval_fprime(double s, const PowerPair& pp) {
  return pp.p * abs_pow(s, pp.p - 1.0) - pp.q * abs_pow(s, pp.q - 1.0);
}

double defocusing_combination(double s, const PowerPair& pp) {
  return s * eval_f(s, pp) - 2.0 * eval_F(s, pp);
}

double find_s0(const PowerPair& pp) {
  validate(pp);
  // F(s) - s^2/2 = s^2 g(s); g(0) = -1/2 and g has a single positive root.
  auto g = [&](double s) {
    return abs_pow(s, pp.p - 1.0) / (pp.p + 1.0) - abs_pow(s, pp.q - 1.0) / (pp.q + 1.0) - 0.5;
  };
  double lo = 0.0, hi = 1.0;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e100 || !std::isfinite(g(hi))) {
      throw NumericalError("find_s0: could not bracket the root of F(s) - s^2/2");
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::fabs(g(lo)) <= std::fabs(g(hi)) ? lo : hi;
}

ExponentConstants exponent_constants(const PowerPair& pp) {
  validate(pp);
  auto star = [](double e) { return e <= 3.0 ? 0.5 * (e - 1.0) : e - 2.0; };
  ExponentConstants c{};
  c.q_star = star(pp.q);
  c.p_star = star(pp.p);
  c.gamma0 = std::min(c.q_star, 1.0) / 8.0;
  return c;
}

void apply_f(const Eigen::VectorXd& u, const PowerPair& pp, Eigen::VectorXd& out) {
  out.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = eval_f(u[i], pp);
}

void apply_F(const Eigen::VectorXd& u, const PowerPair& pp, Eigen::VectorXd& out) {
  out.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = eval_F(u[i], pp);
}

void apply_fprime(const Eigen::VectorXd& u, const PowerPair& pp, Eigen::VectorXd& out) {
  out.resize(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = eval_fprime(u[i], pp);
}

}  // namespace nlkg
