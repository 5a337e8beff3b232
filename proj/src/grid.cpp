#include "nlkg/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>

#include "nlkg/errors.hpp"

namespace nlkg {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Field GridSpec::coordinates() const {
  Field x(points);
  for (int j = 0; j < points; ++j) x[j] = this->x(j);
  return x;
}

void validate(const GridSpec& g) {
  if (!(g.half_width > 0.0) || !std::isfinite(g.half_width)) {
    throw ValidationError("grid half_width X must be positive");
  }
  if (g.points < 256 || g.points % 2 != 0) {
    throw ValidationError("grid points M must be even and >= 256 (got " + std::to_string(g.points) + ")");
  }
  if (!(g.dx() < 0.2)) {
    throw ValidationError("grid spacing dx = 2X/M must be < 0.2 (got " + std::to_string(g.dx()) + ")");
  }
}

bool same_grid(const GridSpec& a, const GridSpec& b) {
  return a.points == b.points && a.half_width == b.half_width;
}

double wrap_displacement(double x, double y, const GridSpec& g) {
  const double P = g.period();
  double d = x - y;
  d -= P * std::floor((d + g.half_width) / P);
  return d;
}

State zero_state(const GridSpec& g) {
  State s;
  s.u1 = Field::Zero(g.points);
  s.u2 = Field::Zero(g.points);
  return s;
}

Fourier::Fourier(const GridSpec& g) : grid_(g) {
  const int M = g.points;
  const int K = M / 2 + 1;
  k_.resize(K);
  for (int j = 0; j < K; ++j) k_[j] = M_PI * j / g.half_width;
  rbuf_ = fftw_alloc_real(M);
  cbuf_ = fftw_alloc_complex(K);
  scratch_.resize(K);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_f_ = fftw_plan_dft_r2c_1d(M, rbuf_, static_cast<fftw_complex*>(cbuf_), FFTW_ESTIMATE);
  plan_b_ = fftw_plan_dft_c2r_1d(M, static_cast<fftw_complex*>(cbuf_), rbuf_, FFTW_ESTIMATE);
}

Fourier::~Fourier() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_f_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_b_));
  fftw_free(rbuf_);
  fftw_free(cbuf_);
}

void Fourier::forward(const Field& in, std::vector<std::complex<double>>& out) {
  const int M = grid_.points;
  std::copy(in.data(), in.data() + M, rbuf_);
  fftw_execute(static_cast<fftw_plan>(plan_f_));
  out.resize(modes());
  auto* c = static_cast<std::complex<double>*>(cbuf_);
  std::copy(c, c + modes(), out.begin());
}

void Fourier::backward(const std::vector<std::complex<double>>& in, Field& out) {
  const int M = grid_.points;
  auto* c = static_cast<std::complex<double>*>(cbuf_);
  std::copy(in.begin(), in.begin() + modes(), c);
  fftw_execute(static_cast<fftw_plan>(plan_b_));
  out.resize(M);
  const double s = 1.0 / M;
  for (int j = 0; j < M; ++j) out[j] = rbuf_[j] * s;
}

Field Fourier::derivative(const Field& in, int order) {
  Field out;
  derivative(in, out, order);
  return out;
}

void Fourier::derivative(const Field& in, Field& out, int order) {
  forward(in, scratch_);
  const int K = modes();
  const std::complex<double> I(0.0, 1.0);
  for (int j = 0; j < K; ++j) {
    const double k = k_[j];
    switch (order) {
      case 1:
        scratch_[j] *= (j == K - 1) ? 0.0 : 1.0;
        scratch_[j] *= I * k;
        break;
      case 2:
        scratch_[j] *= -k * k;
        break;
      default: {
        std::complex<double> m = 1.0;
        for (int o = 0; o < order; ++o) m *= I * k;
        if (order % 2 == 1 && j == K - 1) m = 0.0;
        scratch_[j] *= m;
      }
    }
  }
  backward(scratch_, out);
}

RefinedSample fourier_refine(const Field& values, const GridSpec& g, int factor) {
  if (factor < 1) throw ValidationError("refinement factor must be >= 1");
  Fourier coarse(g);
  std::vector<std::complex<double>> c;
  coarse.forward(values, c);
  GridSpec fine{g.half_width, g.points * factor};
  Fourier ff(fine);
  const int Kc = coarse.modes();
  const int Kf = ff.modes();
  const std::complex<double> I(0.0, 1.0);
  RefinedSample r;
  r.dx = fine.dx();
  for (int order = 0; order < 3; ++order) {
    std::vector<std::complex<double>> cf(Kf, 0.0);
    for (int j = 0; j < Kc; ++j) {
      double w = factor;
      if (j == Kc - 1 && factor > 1) w *= 0.5;
      std::complex<double> m = 1.0;
      for (int o = 0; o < order; ++o) m *= I * coarse.wavenumbers()[j];
      if (factor == 1 && j == Kc - 1 && order % 2 == 1) m = 0.0;
      cf[j] = c[j] * w * m;
    }
    Field out;
    ff.backward(cf, out);
    if (order == 0) r.v = out;
    if (order == 1) r.d1 = out;
    if (order == 2) r.d2 = out;
  }
  return r;
}

}  // namespace nlkg
