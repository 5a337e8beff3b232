#include "nlkg/ground_state.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "nlkg/errors.hpp"

namespace nlkg {

namespace {

constexpr double kTableStep = 0.005;
constexpr double kTableEnd = 460.0;
// Switch from the second-order ODE to the first integral; beyond this the
// growing mode of Q'' = Q - f(Q) would amplify rounding.
constexpr double kCoreEnd = 1.5;

std::shared_ptr<const EvenProfile> build_shape(const PowerPair& pp) {
  const double s0 = find_s0(pp);
  namespace ode = boost::numeric::odeint;
  const auto n = static_cast<std::size_t>(std::llround(kTableEnd / kTableStep)) + 1;
  const auto n_core = static_cast<std::size_t>(std::llround(kCoreEnd / kTableStep)) + 1;
  std::vector<double> v(n), d1(n), d2(n);

  // Core: Q'' = Q - f(Q) from the regular point Q(0) = s0, Q'(0) = 0.
  using Vec2 = std::array<double, 2>;
  auto rhs2 = [&pp](const Vec2& y, Vec2& dy, double) {
    dy[0] = y[1];
    dy[1] = y[0] - eval_f(y[0], pp);
  };
  std::vector<double> times;
  for (std::size_t i = 0; i < n_core; ++i) times.push_back(i * kTableStep);
  Vec2 y{s0, 0.0};
  std::size_t k = 0;
  ode::integrate_times(ode::make_controlled(1e-15, 1e-15, ode::runge_kutta_dopri5<Vec2>()), rhs2, y,
                       times.begin(), times.end(), 1e-4, [&](const Vec2& s, double) {
                         v[k] = s[0];
                         d1[k] = s[1];
                         ++k;
                       });

  // Tail: the first integral in log form, w = ln Q, w' = -sqrt(1 - 2F(Q)/Q^2).
  auto slope = [&pp](double Q) {
    const double r = 2.0 * (abs_pow(Q, pp.p - 1.0) / (pp.p + 1.0) - abs_pow(Q, pp.q - 1.0) / (pp.q + 1.0));
    return std::sqrt(std::max(1.0 - r, 0.0));
  };
  using Vec1 = std::array<double, 1>;
  auto rhs1 = [&](const Vec1& w, Vec1& dw, double) { dw[0] = -slope(std::exp(w[0])); };
  times.clear();
  for (std::size_t i = n_core - 1; i < n; ++i) times.push_back(i * kTableStep);
  Vec1 w{std::log(v[n_core - 1])};
  k = n_core - 1;
  ode::integrate_times(ode::make_controlled(1e-14, 1e-14, ode::runge_kutta_dopri5<Vec1>()), rhs1, w,
                       times.begin(), times.end(), 1e-4, [&](const Vec1& s, double) {
                         if (k >= n_core) {
                           const double Q = std::exp(s[0]);
                           v[k] = Q;
                           d1[k] = -Q * slope(Q);
                         }
                         ++k;
                       });
  if (k != n) throw NumericalError("ground state integration stopped early");

  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i]) || !(v[i] > 0.0) || (i > 0 && v[i] >= v[i - 1])) {
      throw NumericalError("ground state profile does not decay monotonically at x=" +
                           std::to_string(i * kTableStep));
    }
    d2[i] = v[i] - eval_f(v[i], pp);
  }
  return std::make_shared<const EvenProfile>(kTableStep, std::move(v), std::move(d1), std::move(d2), 1.0);
}

}  // namespace

std::shared_ptr<const EvenProfile> ground_state_shape(const PowerPair& pp) {
  validate(pp);
  static std::mutex mtx;
  static std::map<std::pair<double, double>, std::shared_ptr<const EvenProfile>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(pp.q, pp.p);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto shape = build_shape(pp);
  cache.emplace(key, shape);
  return shape;
}

double lorentz_factor(double ell) {
  if (!(std::fabs(ell) < 1.0)) throw ValidationError("speed must satisfy |l| < 1");
  return std::sqrt(1.0 - ell * ell);
}

Profile solve_ground_state(const PowerPair& pp, const GridSpec& grid) {
  validate(grid);
  auto shape = ground_state_shape(pp);
  if (!(shape->value(grid.half_width) < 1e-12)) {
    throw ValidationError("grid too narrow for the ground state: Q(X) >= 1e-12, increase X (X >= 30 suggested)");
  }
  return sample_profile(shape, grid, 1.0, 1.0);
}

Profile lorentz_boost(const Profile& Q, double ell) {
  const double g = lorentz_factor(ell);
  return sample_profile(Q.shape, Q.grid, Q.scale * g, Q.decay_rate / g);
}

State soliton_state(const Profile& Q, int sigma, double ell, double y) {
  if (sigma != 1 && sigma != -1) throw ValidationError("soliton sign must be +1 or -1");
  const double g = lorentz_factor(ell);
  const GridSpec& grid = Q.grid;
  const double fold = Q.scale * g;  // e-folding length of Q_l
  if (!(y >= -grid.half_width && y < grid.half_width)) {
    throw ValidationError("soliton center outside the grid");
  }
  if (grid.half_width - std::fabs(y) < 5.0 * fold) {
    throw ValidationError("soliton center within 5 e-folding lengths of the periodic seam");
  }
  State s = zero_state(grid);
  for (int j = 0; j < grid.points; ++j) {
    const double d = wrap_displacement(grid.x(j), y, grid);
    ProfileValue q = Q.shape->eval(d / fold);
    s.u1[j] = sigma * q.v;
    s.u2[j] = -sigma * ell * q.d1 / fold;
  }
  return s;
}

}  // namespace nlkg
