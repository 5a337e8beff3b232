#include "nlkg/evolution.hpp"

#include <cmath>

#include "nlkg/errors.hpp"

namespace nlkg {

std::string to_string(Scheme s) {
  return s == Scheme::strang_spectral ? "strang_spectral" : "leapfrog_fd4";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "strang_spectral") return Scheme::strang_spectral;
  if (name == "leapfrog_fd4") return Scheme::leapfrog_fd4;
  throw ValidationError("unknown scheme '" + name + "' (expected strang_spectral or leapfrog_fd4)");
}

void validate(const EvolveConfig& cfg, const GridSpec& g) {
  if (!(cfg.dt > 0.0)) throw ValidationError("dt must be positive");
  if (cfg.scheme == Scheme::strang_spectral && cfg.dt > 0.1) {
    throw ValidationError("dt must be <= 0.1 for strang_spectral");
  }
  if (cfg.scheme == Scheme::leapfrog_fd4 && cfg.dt > 0.5 * g.dx()) {
    throw ValidationError("dt must be <= 0.5 dx for leapfrog_fd4");
  }
  if (!(cfg.t_end >= 0.0)) throw ValidationError("t_end must be nonnegative");
  if (cfg.record_every < 1) throw ValidationError("record_every must be >= 1");
}

double minimum_half_width(const std::vector<double>& centers, double t_end) {
  double m = 0.0;
  for (double y : centers) m = std::max(m, std::fabs(y));
  return m + t_end + 20.0;
}

Evolver::Evolver(const PowerPair& pp, const GridSpec& g, const EvolveConfig& cfg)
    : pp_(pp), grid_(g), cfg_(cfg), F_(g) {
  validate(pp);
  validate(g);
  validate(cfg, g);
}

void Evolver::check(const State& s) const {
  const double m = s.u1.cwiseAbs().maxCoeff();
  if (!(m <= kBlowUpLevel)) {
    throw BlowUp("blow-up: max|u1| = " + std::to_string(m) + " at t = " + std::to_string(s.t));
  }
}

void Evolver::kick(State& s, double h) {
  for (Eigen::Index j = 0; j < s.u1.size(); ++j) s.u2[j] += h * eval_f(s.u1[j], pp_);
}

void Evolver::strang(State& s, double dt) {
  if (dt != cached_dt_) {
    const auto& k = F_.wavenumbers();
    const std::size_t K = k.size();
    c_.resize(K);
    s_over_w_.resize(K);
    w_s_.resize(K);
    for (std::size_t j = 0; j < K; ++j) {
      const double w = std::sqrt(k[j] * k[j] + 1.0);
      c_[j] = std::cos(w * dt);
      s_over_w_[j] = std::sin(w * dt) / w;
      w_s_[j] = w * std::sin(w * dt);
    }
    cached_dt_ = dt;
  }
  kick(s, 0.5 * dt);
  F_.forward(s.u1, a_);
  F_.forward(s.u2, b_);
  for (std::size_t j = 0; j < a_.size(); ++j) {
    const std::complex<double> a = a_[j], b = b_[j];
    a_[j] = c_[j] * a + s_over_w_[j] * b;
    b_[j] = -w_s_[j] * a + c_[j] * b;
  }
  F_.backward(a_, s.u1);
  F_.backward(b_, s.u2);
  kick(s, 0.5 * dt);
  s.t += dt;
}

void Evolver::fd4_accel(const Field& u, Field& out) {
  const int M = grid_.points;
  const double c = 1.0 / (12.0 * grid_.dx() * grid_.dx());
  out.resize(M);
  for (int j = 0; j < M; ++j) {
    const double um2 = u[(j - 2 + M) % M], um1 = u[(j - 1 + M) % M];
    const double up1 = u[(j + 1) % M], up2 = u[(j + 2) % M];
    const double lap = c * (-up2 + 16.0 * up1 - 30.0 * u[j] + 16.0 * um1 - um2);
    out[j] = lap - u[j] + eval_f(u[j], pp_);
  }
}

void Evolver::leapfrog(State& s, double dt) {
  if (!(dt > 0.0)) throw ValidationError("leapfrog_fd4 runs forward only");
  if (!have_prev_ || prev_t_ != s.t - dt) {
    fd4_accel(s.u1, tmp_);
    prev_u1_ = s.u1 - dt * s.u2 + 0.5 * dt * dt * tmp_;
  }
  fd4_accel(s.u1, tmp_);
  Field next = 2.0 * s.u1 - prev_u1_ + dt * dt * tmp_;
  prev_u1_ = s.u1;
  fd4_accel(next, tmp_);
  s.u2 = (next - s.u1) / dt + 0.5 * dt * tmp_;
  s.u1 = next;
  prev_t_ = s.t;
  s.t += dt;
  have_prev_ = true;
}

void Evolver::step(State& s) { step(s, cfg_.dt); }

void Evolver::step(State& s, double dt) {
  if (cfg_.scheme == Scheme::strang_spectral) {
    strang(s, dt);
  } else {
    leapfrog(s, dt);
  }
  check(s);
}

void Evolver::advance(State& s, long nsteps) {
  for (long i = 0; i < nsteps; ++i) step(s);
}

State step(const State& s, const EvolveConfig& cfg, const PowerPair& pp, const GridSpec& g) {
  Evolver ev(pp, g, cfg);
  State out = s;
  ev.step(out);
  return out;
}

double energy(const State& s, const PowerPair& pp, Fourier& F) {
  Field d = F.derivative(s.u1);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < s.u1.size(); ++j) {
    sum += d[j] * d[j] + s.u1[j] * s.u1[j] + s.u2[j] * s.u2[j] - 2.0 * eval_F(s.u1[j], pp);
  }
  return sum * F.grid().dx();
}

double momentum(const State& s, Fourier& F) {
  Field d = F.derivative(s.u1);
  return 2.0 * d.dot(s.u2) * F.grid().dx();
}

void evolve(State& s, const PowerPair& pp, const GridSpec& g, const EvolveConfig& cfg,
            const std::function<bool(const State&)>& record) {
  Evolver ev(pp, g, cfg);
  const long nsteps = std::lround(cfg.t_end / cfg.dt);
  if (record && !record(s)) return;
  for (long i = 1; i <= nsteps; ++i) {
    ev.step(s);
    if ((i % cfg.record_every == 0 || i == nsteps) && record && !record(s)) return;
  }
}

}  // namespace nlkg
