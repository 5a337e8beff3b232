#include "nlkg/modulation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "nlkg/errors.hpp"

namespace nlkg {

void validate(const SolitonConfig& c) {
  const std::size_t N = c.signs.size();
  if (N == 0) throw ValidationError("at least one soliton is required");
  if (c.speeds.size() != N || c.centers.size() != N) {
    throw ValidationError("signs, speeds and centers must have equal length");
  }
  for (std::size_t n = 0; n < N; ++n) {
    if (c.signs[n] != 1 && c.signs[n] != -1) throw ValidationError("soliton signs must be +1 or -1");
    if (!(std::fabs(c.speeds[n]) < 1.0)) throw ValidationError("soliton speeds must satisfy |l| < 1");
    if (n > 0) {
      if (!(c.speeds[n] > c.speeds[n - 1])) throw ValidationError("speeds must be strictly increasing");
      if (!(c.centers[n] - c.centers[n - 1] > c.L)) {
        throw ValidationError("initial centers must be increasing with gaps larger than L");
      }
    }
  }
}

Decomposer::Decomposer(const SpectralData& sd, const GridSpec& grid, std::vector<int> signs,
                       std::vector<double> speeds, ModulationConfig cfg)
    : sd_(sd), grid_(grid), signs_(std::move(signs)), speeds_(std::move(speeds)), cfg_(cfg), F_(grid) {
  validate(grid);
  if (signs_.empty() || signs_.size() != speeds_.size()) throw ValidationError("signs and speeds must match");
  for (double l : speeds_) lorentz_factor(l);
  gamma0_ = exponent_constants(sd.pp).gamma0;
}

Decomposer::Window Decomposer::window(double y) const {
  const int M = grid_.points;
  const double dx = grid_.dx();
  const double W = std::min(kProfileWindow, grid_.half_width - dx);
  Window w;
  const long jlo = static_cast<long>(std::ceil((y - W + grid_.half_width) / dx));
  const long jhi = static_cast<long>(std::floor((y + W + grid_.half_width) / dx));
  w.idx.reserve(jhi - jlo + 1);
  w.d.reserve(jhi - jlo + 1);
  for (long j = jlo; j <= jhi; ++j) {
    w.idx.push_back(static_cast<int>(((j % M) + M) % M));
    w.d.push_back(-grid_.half_width + j * dx - y);
  }
  return w;
}

double Decomposer::theta(const std::vector<double>& y) const {
  double th = 0.0;
  for (std::size_t n = 0; n + 1 < y.size(); ++n) th += std::exp(-4.0 * gamma0_ * (y[n + 1] - y[n]));
  return th;
}

State Decomposer::soliton_sum(const std::vector<double>& y) const {
  State s = zero_state(grid_);
  for (int n = 0; n < size(); ++n) {
    const double l = speeds_[n], g = lorentz_factor(l), sg = signs_[n];
    const Window w = window(y[n]);
    for (std::size_t i = 0; i < w.idx.size(); ++i) {
      const ProfileValue q = sd_.Q.shape->eval(w.d[i] / g);
      s.u1[w.idx[i]] += sg * q.v;
      s.u2[w.idx[i]] += -sg * l * q.d1 / g;
    }
  }
  return s;
}

EigenDirections Decomposer::directions(int n, double y) const {
  EigenDirections e = build_eigendirections(sd_, speeds_[n], y, grid_);
  if (signs_[n] < 0) {
    e.Z0.u1 = -e.Z0.u1;
    e.Z0.u2 = -e.Z0.u2;
  }
  return e;
}

double Decomposer::h_norm(const State& phi) {
  Field d = F_.derivative(phi.u1);
  return std::sqrt((d.squaredNorm() + phi.u1.squaredNorm() + phi.u2.squaredNorm()) * grid_.dx());
}

void Decomposer::measure(const State& phi, const std::vector<double>& y, ModulationFrame& f) {
  const int N = size();
  const double dx = grid_.dx();
  f.a_plus.assign(N, 0.0);
  f.a_minus.assign(N, 0.0);
  f.orthogonality.assign(N, 0.0);
  f.z0_norms.assign(N, 0.0);
  for (int n = 0; n < N; ++n) {
    const double l = speeds_[n], g = lorentz_factor(l), sg = signs_[n];
    const double rate = l * sd_.nu0 / g;
    const Window w = window(y[n]);
    double ap = 0, am = 0, o = 0, zz = 0;
    for (std::size_t i = 0; i < w.idx.size(); ++i) {
      const int j = w.idx[i];
      const double z = w.d[i] / g;
      const ProfileValue q = sd_.Q.shape->eval(z);
      const ProfileValue yv = sd_.Y.shape->eval(z);
      const double e = std::exp(rate * w.d[i]);
      const double dY = yv.d1 / g;
      const double z01 = sg * q.d1 / g, z02 = -sg * l * q.d2 / (g * g);
      ap += phi.u1[j] * (l * dY + sd_.nu0 / g * yv.v) * e + phi.u2[j] * yv.v * e;
      am += phi.u1[j] * (l * dY - sd_.nu0 / g * yv.v) / e + phi.u2[j] * yv.v / e;
      o += phi.u1[j] * z01 + phi.u2[j] * z02;
      zz += z01 * z01 + z02 * z02;
    }
    f.a_plus[n] = ap * dx;
    f.a_minus[n] = am * dx;
    f.orthogonality[n] = o * dx;
    f.z0_norms[n] = std::sqrt(zz * dx);
  }
  f.phi_norm = h_norm(phi);
  f.theta = theta(y);
}

ModulationFrame Decomposer::decompose(const State& s, const std::vector<double>& guess_y, bool keep_phi) {
  const int N = size();
  if (static_cast<int>(guess_y.size()) != N) throw ValidationError("guess has wrong number of centers");
  const double dx = grid_.dx();
  ModulationFrame f;
  f.t = s.t;
  std::vector<double> y = guess_y;
  f.y_history.push_back(y);

  State phi;
  Eigen::VectorXd Fv(N);
  Eigen::MatrixXd J(N, N);
  std::vector<Window> wins(N);
  std::vector<std::vector<double>> z1(N), z2(N), dz1(N), dz2(N);

  auto evaluate = [&]() {
    phi = s;
    for (int n = 0; n < N; ++n) {
      const double l = speeds_[n], g = lorentz_factor(l), sg = signs_[n];
      wins[n] = window(y[n]);
      const Window& w = wins[n];
      const std::size_t K = w.idx.size();
      z1[n].resize(K);
      z2[n].resize(K);
      dz1[n].resize(K);
      dz2[n].resize(K);
      for (std::size_t i = 0; i < K; ++i) {
        const ProfileValue q = sd_.Q.shape->eval(w.d[i] / g);
        const double q3 = q_third(q, sd_.pp);
        phi.u1[w.idx[i]] -= sg * q.v;
        phi.u2[w.idx[i]] -= -sg * l * q.d1 / g;
        z1[n][i] = sg * q.d1 / g;
        z2[n][i] = -sg * l * q.d2 / (g * g);
        dz1[n][i] = sg * q.d2 / (g * g);
        dz2[n][i] = -sg * l * q3 / (g * g * g);
      }
    }
    J.setZero();
    for (int n = 0; n < N; ++n) {
      const Window& w = wins[n];
      double Fn = 0.0, dn = 0.0;
      for (std::size_t i = 0; i < w.idx.size(); ++i) {
        const int j = w.idx[i];
        Fn += phi.u1[j] * z1[n][i] + phi.u2[j] * z2[n][i];
        dn += phi.u1[j] * dz1[n][i] + phi.u2[j] * dz2[n][i];
      }
      Fv[n] = Fn * dx;
      J(n, n) -= dn * dx;
      for (int m = 0; m < N; ++m) {
        // (Z0_m, Z0_n): only overlapping windows contribute
        const Window& wm = wins[m];
        double acc = 0.0;
        if (m == n) {
          for (std::size_t i = 0; i < w.idx.size(); ++i) acc += z1[n][i] * z1[n][i] + z2[n][i] * z2[n][i];
        } else {
          const int M = grid_.points;
          for (std::size_t i = 0; i < w.idx.size(); ++i) {
            const long k = ((w.idx[i] - wm.idx.front()) % M + M) % M;
            if (k < static_cast<long>(wm.idx.size())) acc += z1[n][i] * z1[m][k] + z2[n][i] * z2[m][k];
          }
        }
        J(n, m) += acc * dx;
      }
    }
  };

  auto check_order = [&](const std::vector<double>& yy) {
    for (int n = 0; n + 1 < N; ++n) {
      if (!(yy[n + 1] - yy[n] > cfg_.min_separation)) {
        throw CrossingCenters("centers not increasing with gap > " + std::to_string(cfg_.min_separation) +
                              " (y" + std::to_string(n + 1) + "=" + std::to_string(yy[n]) + ", y" +
                              std::to_string(n + 2) + "=" + std::to_string(yy[n + 1]) + ")");
      }
    }
  };

  bool reached = false;
  std::vector<double> y_prev;
  double res_prev = 0.0;
  for (int it = 0;; ++it) {
    evaluate();
    const double res = Fv.cwiseAbs().maxCoeff();
    f.residual_history.push_back(res);
    if (!std::isfinite(res)) throw NoConvergence("decompose: non-finite residual");
    if (reached) {
      if (res > res_prev) {
        y = y_prev;
        evaluate();
        f.residual_history.push_back(Fv.cwiseAbs().maxCoeff());
      }
      break;
    }
    if (res <= cfg_.tolerance) {
      if (res == 0.0) break;
      reached = true;
      y_prev = y;
      res_prev = res;
    } else if (it >= cfg_.max_iterations) {
      throw NoConvergence("decompose: no convergence after " + std::to_string(cfg_.max_iterations) +
                          " iterations (residual " + std::to_string(res) + ")");
    }
    Eigen::VectorXd delta = J.partialPivLu().solve(-Fv);
    if (!delta.allFinite() || delta.cwiseAbs().maxCoeff() > cfg_.max_step) {
      throw NoConvergence("decompose: Newton step left the basin");
    }
    for (int n = 0; n < N; ++n) y[n] += delta[n];
    check_order(y);
    f.y_history.push_back(y);
    f.iterations = it + 1;
  }
  check_order(y);
  f.y = y;
  measure(phi, y, f);
  if (keep_phi) f.phi = std::move(phi);
  return f;
}

State Decomposer::mod_vector(const std::vector<double>& y, const std::vector<double>& ydot) const {
  State m = zero_state(grid_);
  for (int n = 0; n < size(); ++n) {
    const double l = speeds_[n], g = lorentz_factor(l), sg = signs_[n];
    const double c = ydot[n] - l;
    const Window w = window(y[n]);
    for (std::size_t i = 0; i < w.idx.size(); ++i) {
      const ProfileValue q = sd_.Q.shape->eval(w.d[i] / g);
      m.u1[w.idx[i]] += c * sg * q.d1 / g;
      m.u2[w.idx[i]] += -c * l * sg * q.d2 / (g * g);
    }
  }
  return m;
}

Field Decomposer::phi_forcing(const State& phi, const std::vector<double>& y) {
  State R = soliton_sum(y);
  Field out = F_.derivative(phi.u1, 2) - phi.u1;
  for (int j = 0; j < grid_.points; ++j) out[j] += eval_f(R.u1[j] + phi.u1[j], sd_.pp);
  for (int n = 0; n < size(); ++n) {
    const double g = lorentz_factor(speeds_[n]), sg = signs_[n];
    const Window w = window(y[n]);
    for (std::size_t i = 0; i < w.idx.size(); ++i) {
      out[w.idx[i]] -= eval_f(sg * sd_.Q.shape->value(w.d[i] / g), sd_.pp);
    }
  }
  return out;
}

ModulationDiagnostics modulation_residuals(const ModulationFrame& frame, const ModulationFrame& prev,
                                           const std::vector<double>& speeds) {
  ModulationDiagnostics d;
  const double dt = frame.t - prev.t;
  if (!(dt != 0.0)) throw ValidationError("frames must be at distinct times");
  for (std::size_t n = 0; n < frame.y.size(); ++n) {
    const double v = (frame.y[n] - prev.y[n]) / dt;
    d.ydot.push_back(v);
    d.ratio.push_back(std::fabs(v - speeds[n]) / (frame.phi_norm + frame.theta));
  }
  return d;
}

std::vector<std::vector<double>> ydot_series(const std::vector<ModulationFrame>& frames) {
  const std::size_t T = frames.size();
  std::vector<std::vector<double>> out(T);
  if (T < 2) return out;
  for (std::size_t k = 0; k < T; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = k + 1 == T ? k : k + 1;
    const double dt = frames[b].t - frames[a].t;
    for (std::size_t n = 0; n < frames[k].y.size(); ++n) {
      out[k].push_back((frames[b].y[n] - frames[a].y[n]) / dt);
    }
  }
  return out;
}

GrowthFit exponential_mode_rates(const std::vector<ModulationFrame>& frames, int n, bool plus, double floor,
                                 double ceiling) {
  std::size_t best_start = 0, best_len = 0, start = 0, len = 0;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const double a = std::fabs(plus ? frames[k].a_plus[n] : frames[k].a_minus[n]);
    if (a >= floor && a <= ceiling) {
      if (len == 0) start = k;
      ++len;
      if (len > best_len) {
        best_len = len;
        best_start = start;
      }
    } else {
      len = 0;
    }
  }
  if (best_len < 10) {
    throw WindowTooShort("growth window has " + std::to_string(best_len) + " samples (need >= 10)");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = best_start; k < best_start + best_len; ++k) {
    const double t = frames[k].t;
    const double v = std::log(std::fabs(plus ? frames[k].a_plus[n] : frames[k].a_minus[n]));
    sx += t;
    sy += v;
    sxx += t * t;
    sxy += t * v;
  }
  const double m = static_cast<double>(best_len);
  GrowthFit g;
  g.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  g.samples = static_cast<int>(best_len);
  g.t_first = frames[best_start].t;
  g.t_last = frames[best_start + best_len - 1].t;
  return g;
}

}  // namespace nlkg
