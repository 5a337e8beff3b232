#pragma once

// Continuous even profiles: quintic Hermite table on [0, x_end] with an
// exponential tail beyond, plus the grid-sampled Profile type.

#include <memory>
#include <vector>

#include "nlkg/grid.hpp"

namespace nlkg {

struct ProfileValue {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

class EvenProfile {
 public:
  // Nodes at x_i = i*h, i = 0..n-1, holding value, first and second derivative.
  // For |x| > x_end the profile continues as v_end * exp(-tail_rate (|x| - x_end)).
  EvenProfile(double h, std::vector<double> v, std::vector<double> d1, std::vector<double> d2,
              double tail_rate);

  ProfileValue eval(double x) const;
  double value(double x) const { return eval(x).v; }
  double x_end() const { return h_ * (v_.size() - 1); }
  double spacing() const { return h_; }
  double tail_rate() const { return tail_rate_; }
  const std::vector<double>& node_values() const { return v_; }

 private:
  double h_;
  std::vector<double> v_, d1_, d2_;
  double tail_rate_;
};

// A profile sampled on a grid. `shape` is the continuous even function it was
// sampled from; values[j] = shape(x_j / scale) with scale = sqrt(1 - l^2) after a boost.
struct Profile {
  GridSpec grid;
  Field values;
  double decay_rate = 1.0;
  std::shared_ptr<const EvenProfile> shape;
  double scale = 1.0;

  // Continuous evaluation with derivatives in x (chain rule through `scale`).
  ProfileValue at(double x) const;
};

Profile sample_profile(std::shared_ptr<const EvenProfile> shape, const GridSpec& g, double scale,
                       double decay_rate);

// Least-squares slope of log|values| against x over [x0, x1] (grid points only).
double fitted_log_slope(const Profile& p, double x0, double x1);

}  // namespace nlkg
