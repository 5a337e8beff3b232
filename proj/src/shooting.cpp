#include "nlkg/shooting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "nlkg/errors.hpp"

namespace nlkg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

const ShootSpec& checked(const ShootSpec& s) {
  validate(s);
  return s;
}

}  // namespace

std::string to_string(ExitReason r) {
  switch (r) {
    case ExitReason::horizon:
      return "horizon";
    case ExitReason::tube:
      return "tube";
    case ExitReason::modulation_failure:
      return "modulation_failure";
    case ExitReason::blow_up:
      return "blow_up";
    case ExitReason::classified:
      return "classified";
  }
  return "unknown";
}

void validate(const ShootSpec& s) {
  validate(s.pp);
  validate(s.grid);
  validate(SolitonConfig{s.signs, s.speeds, s.centers, s.signs.size() > 1 ? s.L : 0.0});
  if (s.signs.size() > 1 && !(s.L > 0.0)) throw ValidationError("L must be positive for N >= 2");
  if (!(s.delta >= 0.0) || !(s.delta <= s.delta_max)) {
    throw ValidationError("delta must lie in [0, delta_max = " + std::to_string(s.delta_max) + "]");
  }
  if (!(s.horizon > 0.0)) throw ValidationError("horizon must be positive");
  if (!(s.K_tube > 0.0) || !(s.C0 > 0.0) || !(s.tube_floor >= 0.0) || !(s.ball_radius >= 0.0)) {
    throw ValidationError("K_tube and C0 must be positive, tube_floor and ball_radius nonnegative");
  }
  const double need = minimum_half_width(s.centers, s.horizon);
  if (s.grid.half_width < need) {
    throw ValidationError("grid half-width " + std::to_string(s.grid.half_width) + " below max|y| + T + 20 = " +
                          std::to_string(need));
  }
  validate(s.evolve, s.grid);
  const SearchConfig& c = s.search;
  if (!(c.segment > 0.0) || !(c.lookahead >= c.segment)) {
    throw ValidationError("search segment must be positive and lookahead >= segment");
  }
  if (!(c.mode_threshold > 0.0 && c.mode_threshold <= 1.0)) {
    throw ValidationError("mode_threshold must lie in (0, 1]");
  }
  if (c.max_runs < 1 || c.pattern_runs < 0) throw ValidationError("run budgets must be positive");
  if (s.epsilon && (s.epsilon->u1.size() != s.grid.points || s.epsilon->u2.size() != s.grid.points)) {
    throw ValidationError("epsilon does not match the grid");
  }
}

double separation_term(const ShootSpec& s) {
  if (s.signs.size() < 2) return 0.0;
  return std::exp(-exponent_constants(s.pp).gamma0 * s.L);
}

double tube_radius(const ShootSpec& s) {
  return s.K_tube * std::max(s.delta + separation_term(s), s.tube_floor);
}

double ball_radius(const ShootSpec& s) {
  if (s.ball_radius > 0.0) return s.ball_radius;
  const double e = separation_term(s);
  return std::pow(s.C0, 0.75) * std::max(std::sqrt(s.delta * s.delta + e * e), s.tube_floor);
}

double h_norm(const State& v, Fourier& F) {
  const Field d = F.derivative(v.u1);
  return std::sqrt((d.squaredNorm() + v.u1.squaredNorm() + v.u2.squaredNorm()) * F.grid().dx());
}

State make_perturbation(const ShootSpec& s) {
  const GridSpec& g = s.grid;
  State e = zero_state(g);
  if (s.delta == 0.0) return e;
  std::mt19937_64 rng(s.seed);
  std::normal_distribution<double> N01;
  const double kmax = 2.0;
  const int J = static_cast<int>(std::floor(kmax * g.half_width / M_PI));
  const auto [lo, hi] = std::minmax_element(s.centers.begin(), s.centers.end());
  const double c = 0.5 * (*lo + *hi), w = 0.5 * (*hi - *lo) + 12.0;
  for (Field* f : {&e.u1, &e.u2}) {
    for (int j = 1; j <= J; ++j) {
      const double k = M_PI * j / g.half_width, a = N01(rng), b = N01(rng);
      for (int i = 0; i < g.points; ++i) (*f)[i] += a * std::cos(k * g.x(i)) + b * std::sin(k * g.x(i));
    }
    for (int i = 0; i < g.points; ++i) {
      const double z = (g.x(i) - c) / w;
      const double z2 = z * z;
      (*f)[i] *= std::exp(-z2 * z2 * z2 * z2);
    }
  }
  Fourier F(g);
  const double n = h_norm(e, F);
  e.u1 *= s.delta / n;
  e.u2 *= s.delta / n;
  return e;
}

Shooter::Shooter(const SpectralData& sd, ShootSpec spec)
    : sd_(sd),
      spec_(checked(spec)),
      dec_(sd, spec_.grid, spec_.signs, spec_.speeds, spec_.modulation),
      tube_(tube_radius(spec_)),
      ball_(ball_radius(spec_)) {
  if (spec_.epsilon) {
    eps_ = *spec_.epsilon;
    eps_.t = 0.0;
    spec_.delta = h_norm(eps_, dec_.fourier());
    if (spec_.delta > spec_.delta_max) throw ValidationError("provided epsilon exceeds delta_max");
    tube_ = tube_radius(spec_);
    ball_ = ball_radius(spec_);
  } else {
    eps_ = make_perturbation(spec_);
  }
  for (int n = 0; n < dec_.size(); ++n) {
    const EigenDirections e = dec_.directions(n, spec_.centers[n]);
    z_plus_sq_.push_back(inner(e.Zplus, e.Zplus, spec_.grid.dx()));
  }
}

double Shooter::mode_threshold(int n) const {
  return spec_.search.mode_threshold * tube_ * std::sqrt(z_plus_sq_[n]);
}

State Shooter::initial_base() const {
  State s = dec_.soliton_sum(spec_.centers);
  s.u1 += eps_.u1;
  s.u2 += eps_.u2;
  s.t = 0.0;
  return s;
}

PreparedData Shooter::prepare(const State& base, const std::vector<double>& y_ref,
                              const std::vector<double>& target) {
  const int N = dec_.size();
  if (static_cast<int>(target.size()) != N || static_cast<int>(y_ref.size()) != N) {
    throw ValidationError("target and reference centers must have one entry per soliton");
  }
  std::vector<State> zp;
  for (int n = 0; n < N; ++n) zp.push_back(dec_.directions(n, y_ref[n]).Zplus);

  auto assemble = [&](const Eigen::VectorXd& h) {
    State u = base;
    for (int n = 0; n < N; ++n) {
      u.u1 += h[n] * zp[n].u1;
      u.u2 += h[n] * zp[n].u2;
    }
    return u;
  };
  auto evaluate = [&](const Eigen::VectorXd& h, ModulationFrame& f) {
    try {
      f = dec_.decompose(assemble(h), y_ref);
    } catch (const NumericalError& e) {
      throw NewtonDiverged(std::string("initial-data adjustment left the decomposition basin: ") + e.what());
    }
    Eigen::VectorXd r(N);
    for (int n = 0; n < N; ++n) r[n] = f.a_plus[n] - target[n];
    return r;
  };

  Eigen::VectorXd h = Eigen::VectorXd::Zero(N);
  ModulationFrame f;
  Eigen::VectorXd r = evaluate(h, f);
  Eigen::MatrixXd J(N, N);
  for (int n = 0; n < N; ++n) {
    Eigen::VectorXd hs = h;
    const double step = 1e-4 / z_plus_sq_[n];
    hs[n] += step;
    ModulationFrame fs;
    J.col(n) = (evaluate(hs, fs) - r) / step;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);

  PreparedData out;
  Eigen::VectorXd best_h = h;
  ModulationFrame best_f = f;
  double best = r.cwiseAbs().maxCoeff();
  int it = 0;
  for (; it < 40 && best > 0.0; ++it) {
    h -= lu.solve(r);
    if (!h.allFinite() || h.cwiseAbs().maxCoeff() > 1.0) throw NewtonDiverged("unstable-mode coefficients diverged");
    r = evaluate(h, f);
    const double res = r.cwiseAbs().maxCoeff();
    if (!(res < best)) break;
    const bool slow = res > 0.5 * best;
    best = res;
    best_h = h;
    best_f = f;
    if (slow) break;
  }
  if (!(best <= 1e-10)) {
    throw NewtonDiverged("initial-data adjustment stalled at residual " + std::to_string(best));
  }
  out.u0 = assemble(best_h);
  out.h_plus.assign(best_h.data(), best_h.data() + N);
  out.y_tilde = best_f.y;
  out.frame = best_f;
  out.iterations = it;
  out.residual = best;
  return out;
}

PreparedData Shooter::prepare_initial_data(const std::vector<double>& target) {
  return prepare(initial_base(), spec_.centers, target);
}

RunOutcome Shooter::run(const State& u0, const std::vector<double>& y_guess, double t_limit, bool classify,
                        const FrameObserver& observer, State* state_at, double t_capture) {
  const int N = dec_.size();
  const EvolveConfig& c = spec_.evolve;
  Evolver ev(spec_.pp, spec_.grid, c);
  const long nsteps = std::lround((t_limit - u0.t) / c.dt);
  const long capture = state_at ? std::lround((t_capture - u0.t) / c.dt) : -1;
  RunOutcome out;
  out.exit_signs.assign(N, 0);
  out.cross_times.assign(N, 0.0);
  State s = u0;
  std::vector<double> y = y_guess;

  auto record = [&]() {
    ModulationFrame f;
    try {
      f = dec_.decompose(s, y);
    } catch (const NumericalError& e) {
      out.reason = ExitReason::modulation_failure;
      out.detail = e.what();
      out.exit_time = s.t;
      return false;
    }
    y = f.y;
    out.frames.push_back(f);
    if (observer) observer(s, f);
    bool all = true;
    for (int n = 0; n < N; ++n) {
      if (out.exit_signs[n] == 0 && std::fabs(f.a_plus[n]) >= mode_threshold(n)) {
        out.exit_signs[n] = f.a_plus[n] > 0 ? 1 : -1;
        out.cross_times[n] = f.t;
      }
      all = all && out.exit_signs[n] != 0;
    }
    if (f.phi_norm > tube_) {
      out.reason = ExitReason::tube;
      out.exit_time = f.t;
      return false;
    }
    if (classify && all) {
      out.reason = ExitReason::classified;
      out.exit_time = f.t;
      return false;
    }
    return true;
  };

  if (capture == 0) *state_at = s;
  if (!record()) return out;
  for (long i = 1; i <= nsteps; ++i) {
    try {
      ev.step(s);
    } catch (const BlowUp& e) {
      out.reason = ExitReason::blow_up;
      out.detail = e.what();
      out.exit_time = s.t;
      return out;
    }
    if (i == capture) *state_at = s;
    if ((i % c.record_every == 0 || i == nsteps) && !record()) return out;
  }
  out.reached_limit = true;
  out.reason = ExitReason::horizon;
  out.exit_time = s.t;
  return out;
}

RunOutcome Shooter::run_until_exit(const State& u0) {
  std::vector<double> guess = spec_.centers;
  for (int n = 0; n < dec_.size(); ++n) guess[n] += spec_.speeds[n] * u0.t;
  return run(u0, guess, spec_.horizon);
}

namespace {

// One coordinate of the simultaneous bracket search. A value whose mode exits
// with a+ > 0 is too large (upper end), a+ < 0 too small (lower end).
struct Coordinate {
  double center = 0.0;
  double width = 0.0;
  double lo = 0.0, hi = 0.0;
  bool has_lo = false, has_hi = false;
  double scale = 1.0;  // resolution is 4 eps scale

  double next() {
    if (has_lo && has_hi) return 0.5 * (lo + hi);
    if (has_lo) return lo + width;
    if (has_hi) return hi - width;
    return center;
  }
  void update(double v, int sign) {
    if (sign > 0) {
      if (!has_lo && has_hi) width *= 2.0;
      hi = v;
      has_hi = true;
    } else if (sign < 0) {
      if (has_lo && !has_hi) width *= 2.0;
      lo = v;
      has_lo = true;
    }
  }
  bool converged() const {
    if (!(has_lo && has_hi)) return false;
    const double mid = 0.5 * (lo + hi);
    return hi - lo <= 4.0 * kEps * (std::max(std::fabs(lo), std::fabs(hi)) + scale) || mid == lo || mid == hi;
  }
  double bracket() const { return has_lo && has_hi ? hi - lo : std::numeric_limits<double>::infinity(); }
};

}  // namespace

ShootResult Shooter::shoot(const FrameObserver& observer) {
  const int N = dec_.size();
  const SearchConfig& sc = spec_.search;
  const double dt = spec_.evolve.dt;
  ShootResult res;
  res.tube = tube_;
  res.ball = ball_;

  State base = initial_base();
  std::vector<double> y_ref = spec_.centers;
  std::vector<double> a_now(N, 0.0);
  double t_k = 0.0;
  int k = 0;
  PreparedData first;

  while (t_k < spec_.horizon - 0.5 * dt) {
    const double t_commit = std::min(t_k + sc.segment, spec_.horizon);
    const double t_look = std::min(t_k + sc.lookahead, spec_.horizon);
    std::vector<Coordinate> co(N);
    for (int n = 0; n < N; ++n) {
      co[n].center = k == 0 ? 0.0 : a_now[n];
      co[n].width = sc.initial_width > 0.0 ? sc.initial_width : (k == 0 ? 0.1 * ball_ : 1e-10 * ball_);
      co[n].scale = z_plus_sq_[n];
    }

    struct Candidate {
      std::vector<double> target;
      PreparedData prep;
      RunOutcome run;
      State at_commit;
      double score = -1.0;
    } best;
    SegmentRecord seg;
    seg.t_start = t_k;

    auto trial = [&](const std::vector<double>& target) {
      Candidate c;
      c.target = target;
      ++seg.runs;
      ++res.total_runs;
      try {
        c.prep = prepare(base, y_ref, target);
      } catch (const NewtonDiverged&) {
        c.score = t_k;
        c.run.exit_signs.assign(N, 0);
        return c;
      }
      c.run = run(c.prep.u0, c.prep.y_tilde, t_look, true, {}, &c.at_commit, t_commit);
      c.score = c.run.reached_limit ? t_look : c.run.exit_time;
      return c;
    };
    auto consider = [&](Candidate&& c) {
      if (c.score >= best.score) best = std::move(c);
    };

    bool done = false;
    while (!done && seg.runs < sc.max_runs) {
      std::vector<double> v(N);
      for (int n = 0; n < N; ++n) v[n] = co[n].next();
      Candidate c = trial(v);
      const bool survived = c.run.reached_limit;
      if (!survived) {
        for (int n = 0; n < N; ++n) co[n].update(v[n], c.run.exit_signs[n]);
      }
      consider(std::move(c));
      done = survived;
      if (!done) {
        done = std::all_of(co.begin(), co.end(), [](const Coordinate& x) { return x.converged(); });
      }
    }

    if (best.score < t_commit - 0.5 * dt && sc.pattern_runs > 0) {
      seg.pattern_search = true;
      std::vector<double> step(N);
      for (int n = 0; n < N; ++n) {
        step[n] = std::isfinite(co[n].bracket()) ? std::max(co[n].bracket(), 4.0 * kEps * co[n].scale) : co[n].width;
      }
      int used = 0;
      while (used < sc.pattern_runs && best.score < t_commit - 0.5 * dt) {
        bool improved = false;
        for (int n = 0; n < N && !improved && used < sc.pattern_runs; ++n) {
          for (double sgn : {1.0, -1.0}) {
            std::vector<double> v = best.target;
            v[n] += sgn * step[n];
            Candidate c = trial(v);
            ++used;
            if (c.score > best.score) {
              best = std::move(c);
              improved = true;
              break;
            }
            if (used >= sc.pattern_runs) break;
          }
        }
        if (!improved) {
          for (double& s : step) s *= 0.5;
        }
      }
    }

    seg.target = best.target;
    seg.h_plus = best.prep.h_plus;
    seg.trial_exit = best.score;
    for (int n = 0; n < N; ++n) seg.bracket_width.push_back(co[n].bracket());
    res.segments.push_back(seg);

    if (best.score < t_commit - 0.5 * dt || best.prep.h_plus.empty()) {
      SearchExhausted e("no unstable-amplitude target keeps the solution in the tube past t = " +
                        std::to_string(t_commit) + " (longest exit " + std::to_string(best.score) + ")");
      e.longest_exit_time = best.score;
      throw e;
    }

    if (k == 0) {
      first = best.prep;
      res.h_plus = best.prep.h_plus;
      res.y_tilde0 = best.prep.y_tilde;
      res.a_plus_target = best.target;
    } else {
      res.max_kick = std::max(res.max_kick, max_abs(best.prep.h_plus));
    }

    // committed piece
    std::vector<ModulationFrame> frames;
    if (observer) {
      bool skip_first = k > 0;
      RunOutcome again = run(best.prep.u0, best.prep.y_tilde, t_commit, false,
                             [&](const State& s, const ModulationFrame& f) {
                               if (skip_first) {
                                 skip_first = false;
                                 return;
                               }
                               observer(s, f);
                             });
      frames = std::move(again.frames);
    } else {
      for (const auto& f : best.run.frames) {
        if (f.t <= t_commit + 0.5 * dt) frames.push_back(f);
      }
    }
    for (std::size_t i = (k > 0 ? 1 : 0); i < frames.size(); ++i) res.trajectory.push_back(frames[i]);

    base = best.at_commit;
    const ModulationFrame& last = frames.back();
    y_ref = last.y;
    a_now = last.a_plus;
    t_k = t_commit;
    ++k;
  }

  res.reached_horizon = true;
  res.exit_time = spec_.horizon;
  for (const auto& f : res.trajectory) res.sup_phi_norm = std::max(res.sup_phi_norm, f.phi_norm);
  res.single_trajectory_exit = run(first.u0, first.y_tilde, spec_.horizon).exit_time;
  return res;
}

ShootResult shoot(const ShootSpec& spec, const FrameObserver& observer) {
  validate(spec);
  const SpectralData sd = compute_spectral_data(spec.pp, GridSpec{40.0, 2048});
  Shooter sh(sd, spec);
  return sh.shoot(observer);
}

DominanceReport exit_dominance(Decomposer& D, const State& s, const ModulationFrame& f) {
  const int N = D.size();
  const double dx = D.grid().dx();
  State phi = s;
  const State q = D.soliton_sum(f.y);
  phi.u1 -= q.u1;
  phi.u2 -= q.u2;
  // J Z-+ are the growing / decaying modes of the linearized flow; Z0 is the
  // translation direction that absorbs their non-orthogonal part
  std::vector<State> basis;
  std::vector<bool> growing;
  for (int n = 0; n < N; ++n) {
    const EigenDirections e = D.directions(n, f.y[n]);
    for (const State* z : {&e.Zminus, &e.Zplus}) {
      State v = zero_state(D.grid());
      v.u1 = z->u2;
      v.u2 = -z->u1;
      basis.push_back(v);
      growing.push_back(z == &e.Zminus);
    }
    basis.push_back(e.Z0);
    growing.push_back(false);
  }
  const int K = static_cast<int>(basis.size());
  Eigen::MatrixXd G(K, K);
  Eigen::VectorXd b(K);
  for (int i = 0; i < K; ++i) {
    b[i] = inner(phi, basis[i], dx);
    for (int j = 0; j < K; ++j) G(i, j) = inner(basis[i], basis[j], dx);
  }
  const Eigen::VectorXd c = G.ldlt().solve(b);
  State perp = phi;
  DominanceReport r;
  for (int i = 0; i < K; ++i) {
    perp.u1 -= c[i] * basis[i].u1;
    perp.u2 -= c[i] * basis[i].u2;
    if (growing[i]) r.unstable = std::max(r.unstable, std::fabs(c[i]) * std::sqrt(G(i, i)));
  }
  r.max_a_plus = max_abs(f.a_plus);
  r.phi_perp = std::sqrt(inner(perp, perp, dx));
  r.dominant = r.max_a_plus >= 10.0 * r.phi_perp;
  return r;
}

double ydot_bound_ratio(const std::vector<ModulationFrame>& frames, const ShootSpec& s) {
  if (frames.size() < 2) return 0.0;
  const auto yd = ydot_series(frames);
  const double scale = s.delta + separation_term(s);
  double m = 0.0;
  for (const auto& v : yd) {
    for (std::size_t n = 0; n < v.size(); ++n) m = std::max(m, std::fabs(v[n] - s.speeds[n]));
  }
  return m / scale;
}

std::optional<double> transversality_rate(const std::vector<ModulationFrame>& frames, double level) {
  auto b = [](const ModulationFrame& f) {
    double s = 0.0;
    for (double a : f.a_plus) s += a * a;
    return s;
  };
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    const double b0 = b(frames[k]), b1 = b(frames[k + 1]);
    if (b0 < level && b1 >= level) return (b1 - b0) / (frames[k + 1].t - frames[k].t);
  }
  return std::nullopt;
}

}  // namespace nlkg
