#include "nlkg/profile.hpp"

#include <cmath>
#include <utility>

#include "nlkg/errors.hpp"

namespace nlkg {

EvenProfile::EvenProfile(double h, std::vector<double> v, std::vector<double> d1, std::vector<double> d2,
                         double tail_rate)
    : h_(h), v_(std::move(v)), d1_(std::move(d1)), d2_(std::move(d2)), tail_rate_(tail_rate) {
  if (!(h_ > 0.0) || v_.size() < 2 || d1_.size() != v_.size() || d2_.size() != v_.size()) {
    throw ValidationError("EvenProfile: inconsistent table");
  }
}

ProfileValue EvenProfile::eval(double x) const {
  const double ax = std::fabs(x);
  const double sgn = x < 0.0 ? -1.0 : 1.0;
  ProfileValue r;
  const std::size_t n = v_.size();
  if (ax >= x_end()) {
    const double v = v_[n - 1] * std::exp(-tail_rate_ * (ax - x_end()));
    r.v = v;
    r.d1 = -sgn * tail_rate_ * v;
    r.d2 = tail_rate_ * tail_rate_ * v;
    return r;
  }
  auto i = static_cast<std::size_t>(ax / h_);
  if (i >= n - 1) i = n - 2;
  const double t = ax / h_ - static_cast<double>(i);
  const double h = h_, hh = h_ * h_;
  const double v0 = v_[i], v1 = v_[i + 1];
  const double a0 = h * d1_[i], a1 = h * d1_[i + 1];
  const double b0 = hh * d2_[i], b1 = hh * d2_[i + 1];
  const double c0 = v0;
  const double c1 = a0;
  const double c2 = 0.5 * b0;
  const double c3 = -10.0 * v0 - 6.0 * a0 - 1.5 * b0 + 10.0 * v1 - 4.0 * a1 + 0.5 * b1;
  const double c4 = 15.0 * v0 + 8.0 * a0 + 1.5 * b0 - 15.0 * v1 + 7.0 * a1 - b1;
  const double c5 = -6.0 * v0 - 3.0 * a0 - 0.5 * b0 + 6.0 * v1 - 3.0 * a1 + 0.5 * b1;
  r.v = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
  const double p1 = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
  const double p2 = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
  r.d1 = sgn * p1 / h;
  r.d2 = p2 / hh;
  return r;
}

ProfileValue Profile::at(double x) const {
  ProfileValue u = shape->eval(x / scale);
  u.d1 /= scale;
  u.d2 /= scale * scale;
  return u;
}

Profile sample_profile(std::shared_ptr<const EvenProfile> shape, const GridSpec& g, double scale,
                       double decay_rate) {
  Profile p;
  p.grid = g;
  p.scale = scale;
  p.decay_rate = decay_rate;
  p.shape = std::move(shape);
  p.values.resize(g.points);
  for (int j = 0; j < g.points; ++j) p.values[j] = p.shape->value(g.x(j) / scale);
  return p;
}

double fitted_log_slope(const Profile& p, double x0, double x1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int j = 0; j < p.grid.points; ++j) {
    const double x = p.grid.x(j);
    if (x < x0 || x > x1) continue;
    const double v = std::fabs(p.values[j]);
    if (!(v > 0.0)) continue;
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw ValidationError("fitted_log_slope: fewer than two usable samples");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace nlkg
