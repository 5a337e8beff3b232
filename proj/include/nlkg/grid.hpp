#pragma once

// Uniform periodic grid on [-X, X), sampled fields and FFT-based derivatives.

#include <Eigen/Core>
#include <complex>
#include <memory>
#include <vector>

namespace nlkg {

using Field = Eigen::VectorXd;

struct GridSpec {
  double half_width = 40.0;  // X
  int points = 2048;         // M
  double dx() const { return 2.0 * half_width / points; }
  double x(int j) const { return -half_width + j * dx(); }
  double period() const { return 2.0 * half_width; }
  Field coordinates() const;
};

// Throws ValidationError unless M >= 256 is even, X > 0 and dx < 0.2.
void validate(const GridSpec& g);

bool same_grid(const GridSpec& a, const GridSpec& b);

// x - y mapped to [-X, X).
double wrap_displacement(double x, double y, const GridSpec& g);

struct State {
  Field u1;
  Field u2;
  double t = 0.0;
};

State zero_state(const GridSpec& g);

inline double inner(const Field& a, const Field& b, double dx) { return a.dot(b) * dx; }
inline double inner(const State& a, const State& b, double dx) {
  return (a.u1.dot(b.u1) + a.u2.dot(b.u2)) * dx;
}

// Real-to-complex FFT helper. Instances own scratch buffers and are not
// safe to share between threads; plan creation is serialized internally.
class Fourier {
 public:
  explicit Fourier(const GridSpec& g);
  ~Fourier();
  Fourier(const Fourier&) = delete;
  Fourier& operator=(const Fourier&) = delete;

  const GridSpec& grid() const { return grid_; }
  int modes() const { return grid_.points / 2 + 1; }
  // Nonnegative wavenumbers k_j = pi j / X, j = 0..M/2.
  const std::vector<double>& wavenumbers() const { return k_; }

  void forward(const Field& in, std::vector<std::complex<double>>& out);
  void backward(const std::vector<std::complex<double>>& in, Field& out);

  // Spectral derivative. order 1 zeroes the Nyquist mode; order 2 multiplies by -k^2
  // on every mode, which matches the dense matrices in spectral.hpp.
  Field derivative(const Field& in, int order = 1);
  void derivative(const Field& in, Field& out, int order = 1);

 private:
  GridSpec grid_;
  std::vector<double> k_;
  double* rbuf_ = nullptr;
  void* cbuf_ = nullptr;
  void* plan_f_ = nullptr;
  void* plan_b_ = nullptr;
  std::vector<std::complex<double>> scratch_;
};

// Fourier interpolation of a periodic sample to `factor` times as many points.
// Returns value, first and second derivative on the refined grid.
struct RefinedSample {
  double dx;
  Field v, d1, d2;
};
RefinedSample fourier_refine(const Field& values, const GridSpec& g, int factor);

}  // namespace nlkg
