// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nlkg/errors.hpp"
#include "nlkg/evolution.hpp"
#include "nlkg/functionals.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/modulation.hpp"
#include "nlkg/shooting.hpp"
#include "nlkg/spectral.hpp"

using namespace nlkg;

namespace {

const PowerPair k35{3.0, 5.0};
int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s %2d %-22s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

State add(State a, const State& b, double c = 1.0) {
  a.u1 += c * b.u1;
  a.u2 += c * b.u2;
  return a;
}

State bump(const GridSpec& g, double x0, double w, double a1, double a2) {
  State s = zero_state(g);
  for (int j = 0; j < g.points; ++j) {
    const double e = std::exp(-(g.x(j) - x0) * (g.x(j) - x0) / (w * w));
    s.u1[j] = a1 * e * (1.0 + 0.3 * (g.x(j) - x0));
    s.u2[j] = a2 * e;
  }
  return s;
}

// slope and intercept of y against x
std::pair<double, double> line_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  const double k = sxy / sxx;
  return {k, my - k * mx};
}

ShootSpec pair_spec() {
  ShootSpec s;
  s.pp = k35;
  s.signs = {1, -1};
  s.speeds = {-0.3, 0.3};
  s.centers = {-20.5, 20.5};
  s.L = 40.0;
  s.delta = 1e-3;
  s.horizon = 60.0;
  s.grid = {104.0, 2048};
  s.evolve.t_end = 60.0;
  return s;
}

void c1_ground_state() {
  const GridSpec g{40.0, 2048};
  const auto t0 = std::chrono::steady_clock::now();
  const Profile Q = solve_ground_state(k35, g);
  Fourier F(g);
  const Field d2 = F.derivative(Q.values, 2);
  double res = 0.0;
  for (int j = 0; j < g.points; ++j) {
    if (std::fabs(g.x(j)) <= 30.0) res = std::max(res, std::fabs(d2[j] - Q.values[j] + eval_f(Q.values[j], k35)));
  }
  const double q0 = std::fabs(Q.at(0.0).v - find_s0(k35));
  const double slope = fitted_log_slope(Q, 10.0, 20.0);
  const double secs = seconds_since(t0);
  report(1, "ground state", res <= 1e-8 && q0 <= 1e-10 && std::fabs(slope + 1.0) <= 0.01 && secs < 1.0,
         fmt("residual %.2e, |Q(0)-s0| %.2e, tail slope %.6f, %.3f s", res, q0, slope, secs));
}

void c2_spectrum(const SpectralData& sd) {
  const auto t0 = std::chrono::steady_clock::now();
  const SpectralData fine = compute_spectral_data(k35, GridSpec{40.0, 4096});
  const double secs = seconds_since(t0);
  int negative = 0;
  for (double l : fine.lowest) negative += l < -1e-6;
  const Eigen::MatrixXd L = build_L(sd.Q, k35);
  Fourier F(sd.grid);
  const Field dq = F.derivative(sd.Q.values);
  const double kern = (L * dq).norm() / dq.norm();
  const double dnu = std::fabs(fine.nu0 - sd.nu0);
  report(2, "spectrum", negative == 1 && sd.lowest[1] > -1e-6 && kern <= 1e-6 && dnu <= 1e-6 && secs < 30.0,
         fmt("nu0 %.13f, negative eigenvalues %d, |L Q'|/|Q'| %.2e, nu0 change under doubling %.2e, M=4096 %.1f s",
             sd.nu0, negative, kern, dnu, secs));
}

const std::vector<double> kSpeeds{0.0, 0.3, -0.3, 0.6, -0.6};

void c3_eigen_identity(const SpectralData& sd) {
  double worst = 0.0, orth = 0.0;
  for (double l : kSpeeds) {
    const auto [rp, rm] = eigen_identity_residuals(sd, l, sd.grid);
    worst = std::max({worst, rp, rm});
    const EigenDirections e = build_eigendirections(sd, l, 0.0);
    orth = std::max({orth, std::fabs(inner(e.Z0, e.Zplus, sd.grid.dx())), std::fabs(inner(e.Z0, e.Zminus, sd.grid.dx()))});
  }
  report(3, "eigen-identity", worst <= 1e-6 && orth <= 1e-8,
         fmt("max relative residual %.2e, max |(Z0,Z+-)| %.2e over l in {0,+-0.3,+-0.6}", worst, orth));
}

void c4_coercivity(const SpectralData& sd) {
  double lo = 1e300, hi = -1e300;
  for (double l : kSpeeds) {
    const CoercivityReport r = coercivity_constant(sd, l);
    lo = std::min(lo, r.projected);
    hi = std::max(hi, r.unprojected);
  }
  report(4, "coercivity", lo > 0.0 && hi < 0.0,
         fmt("min projected eigenvalue %.4f, max unprojected eigenvalue %.4f", lo, hi));
}

struct PairRun {
  ShootResult r;
  std::vector<FunctionalSample> samples;
  std::vector<double> I_scale;  // |I(Q_n)| per soliton
  double seconds = 0.0;
  std::vector<std::pair<double, DominanceReport>> controls;
  std::vector<RunOutcome> control_runs;
};

PairRun shoot_pair(const SpectralData& sd) {
  PairRun out;
  const ShootSpec spec = pair_spec();
  Fourier F(spec.grid);
  const CutoffFamily fam = build_cutoffs(spec.speeds, spec.centers, spec.L);
  const CoefficientSet cs = build_coefficients(spec.speeds);
  const Profile Q = solve_ground_state(k35, spec.grid);
  for (double l : spec.speeds) out.I_scale.push_back(std::fabs(momentum(soliton_state(Q, 1, l, 0.0), F)));
  const auto t0 = std::chrono::steady_clock::now();
  Shooter sh(sd, spec);
  out.r = sh.shoot([&](const State& s, const ModulationFrame& f) {
    FunctionalSample smp;
    smp.t = s.t;
    smp.E = energy(s, k35, F);
    smp.I = momentum(s, F);
    smp.J.push_back(j_functional(s, 2, fam, k35, F));
    smp.composite = composite_energy(s, fam, cs, spec.speeds, k35, F);
    smp.phi_norm = f.phi_norm;
    out.samples.push_back(smp);
  });
  for (double sgn : {1.0, -1.0}) {
    std::vector<double> t = out.r.a_plus_target;
    t[0] += sgn * 10.0 * out.r.ball;
    const PreparedData p = sh.prepare_initial_data(t);
    State at;
    const RunOutcome o = sh.run(p.u0, p.y_tilde, spec.horizon, false, [&](const State& s, const ModulationFrame&) { at = s; });
    out.controls.emplace_back(sgn * 10.0 * out.r.ball, exit_dominance(sh.decomposer(), at, o.frames.back()));
    out.control_runs.push_back(o);
  }
  out.seconds = seconds_since(t0);
  return out;
}

void c5_conservation(const PairRun& run) {
  const auto& s0 = run.samples.front();
  double de = 0.0, di = 0.0;
  for (const auto& s : run.samples) {
    if (s.t > 50.0 + 1e-9) break;
    de = std::max(de, std::fabs(s.E - s0.E));
    di = std::max(di, std::fabs(s.I - s0.I));
  }
  const double i_scale = run.I_scale[0] + run.I_scale[1];
  de /= std::fabs(s0.E);
  di /= i_scale;

  const ShootSpec spec = pair_spec();
  const Profile Q = solve_ground_state(k35, spec.grid);
  State s = add(soliton_state(Q, 1, -0.3, -20.5), soliton_state(Q, -1, 0.3, 20.5));
  Evolver ev(k35, spec.grid, spec.evolve);
  State w = s;
  for (int i = 0; i < 400; ++i) ev.step(w, 0.005);
  for (int i = 0; i < 400; ++i) ev.step(w, -0.005);
  const double rev = std::max((w.u1 - s.u1).cwiseAbs().maxCoeff(), (w.u2 - s.u2).cwiseAbs().maxCoeff());
  report(5, "conservation", de <= 1e-6 && di <= 1e-6 && rev <= 1e-9,
         fmt("stabilized pair on [0,50]: dE/E %.2e, dI/sum|I_n| %.2e (segment kicks <= %.1e); reversibility %.2e",
             de, di, run.r.max_kick, rev));
}

void c6_transport(const SpectralData& sd) {
  ShootSpec s;
  s.pp = k35;
  s.signs = {1};
  s.speeds = {0.5};
  s.centers = {0.0};
  s.delta = 0.0;
  s.horizon = 40.0;
  s.grid = {64.0, 2048};
  s.evolve.t_end = 40.0;
  Shooter sh(sd, s);
  const ShootResult r = sh.shoot();
  double err = 0.0;
  for (const auto& f : r.trajectory) err = std::max(err, std::fabs(f.y[0] - 0.5 * f.t - r.y_tilde0[0]));
  const double t_end = r.trajectory.back().t;
  report(6, "transport", r.reached_horizon && err <= 1e-2 && t_end >= 40.0 - 1e-9,
         fmt("l=0.5 stabilized to t=%.1f: max |y-lt-y0| %.2e", t_end, err));
}

double growth_rate(const SpectralData& sd, double ell) {
  const GridSpec g{40.0, 2048};
  const Profile Q = solve_ground_state(k35, g);
  Decomposer D(sd, g, {1}, {ell});
  const EigenDirections e = D.directions(0, 0.0);
  const double zz = inner(e.Zplus, e.Zplus, g.dx());
  State s = add(soliton_state(Q, 1, ell, 0.0), e.Zplus, 1e-5);
  std::vector<ModulationFrame> frames;
  std::vector<double> y{0.0};
  EvolveConfig c{0.005, 6.0, 4, Scheme::strang_spectral};
  evolve(s, k35, g, c, [&](const State& st) {
    frames.push_back(D.decompose(st, y));
    y = frames.back().y;
    return std::fabs(frames.back().a_plus[0]) < 0.05 * zz;
  });
  return exponential_mode_rates(frames, 0, true, 1e-4 * zz, 1e-2 * zz).slope;
}

void c7_growth(const SpectralData& sd) {
  std::string detail;
  bool ok = true;
  for (double l : {0.0, 0.6}) {
    const double want = sd.nu0 * lorentz_factor(l);
    const double got = growth_rate(sd, l);
    ok = ok && std::fabs(got - want) <= 0.1 * want;
    detail += fmt("l=%.1f rate %.4f vs %.4f (%.2f%%)  ", l, got, want, 100.0 * std::fabs(got - want) / want);
  }
  report(7, "instability rate", ok, detail);
}

void c8_coefficients() {
  const CoefficientSet a = build_coefficients({-0.3, 0.3});
  const CoefficientSet b = build_coefficients({-0.5, 0.0, 0.5});
  const bool hand = std::fabs(a.c[0] + 0.3) <= 1e-15 && std::fabs(a.c[1] - 0.6) <= 1e-15 &&
                    std::fabs(b.c[0] + 0.5) <= 1e-15 && std::fabs(b.c[1] - 0.5) <= 1e-15 &&
                    std::fabs(b.c[2] - 0.5) <= 1e-15;
  std::mt19937_64 rng(20261015);
  std::uniform_real_distribution<double> U(-0.95, 0.95);
  std::uniform_int_distribution<int> Nd(1, 6);
  double worst = 0.0;
  int tuples = 0;
  while (tuples < 1000) {
    std::vector<double> l(Nd(rng));
    for (auto& v : l) v = U(rng);
    std::sort(l.begin(), l.end());
    if (std::adjacent_find(l.begin(), l.end()) != l.end()) continue;
    const CoefficientResiduals r = coefficient_residuals(build_coefficients(l), l);
    worst = std::max({worst, r.sum_identity, r.product_identity});
    ++tuples;
  }
  report(8, "coefficients", hand && worst <= 1e-12,
         fmt("hand cases %s, max identity residual %.2e over %d tuples", hand ? "exact" : "wrong", worst, tuples));
}

void c9_monotonicity(const PairRun& run) {
  const ShootSpec spec = pair_spec();
  const CutoffFamily fam = build_cutoffs(spec.speeds, spec.centers, spec.L);
  const double g0 = exponent_constants(k35).gamma0;
  const MonotonicityReport m = monotonicity_audit(run.samples, fam, g0);

  // baseline: pure pair, no perturbation, while it stays near the soliton sum
  const Profile Q = solve_ground_state(k35, spec.grid);
  State s = add(soliton_state(Q, 1, -0.3, -20.5), soliton_state(Q, -1, 0.3, 20.5));
  Fourier F(spec.grid);
  const double e0 = energy(s, k35, F);
  double j0 = 0.0, drift = 0.0;
  EvolveConfig c = spec.evolve;
  c.t_end = 2.5;
  evolve(s, k35, spec.grid, c, [&](const State& st) {
    const double j = j_functional(st, 2, fam, k35, F);
    if (st.t == 0.0) j0 = j;
    drift = std::max(drift, j - j0);
    return true;
  });
  report(9, "monotonicity", m.within_budget && drift <= 1e-3 * std::fabs(e0),
         fmt("in-tube run: max drift %.2e, budget %.2e; baseline [0,2.5]: drift %.2e vs %.2e", m.max_drift[0],
             m.budget, drift, 1e-3 * std::fabs(e0)));
}

void c10_expansion() {
  const GridSpec g{60.0, 2048};
  Fourier F(g);
  const Profile Q = solve_ground_state(k35, g);
  const std::vector<double> l{-0.3, 0.3}, y{-20.5, 20.5};
  const State s1 = soliton_state(Q, 1, l[0], y[0]), s2 = soliton_state(Q, -1, l[1], y[1]);
  const State s = add(s1, s2);
  const CutoffFamily fam = build_cutoffs(l, y, 40.0);
  const CoefficientSet cs = build_coefficients(l);
  const double comp = composite_energy(s, fam, cs, l, k35, F);
  const State phi = add(bump(g, -19.0, 1.5, 1.0, -0.7), bump(g, 22.0, 2.0, -0.5, 0.4));
  double H = 0.0;
  for (int n = 1; n <= 2; ++n) {
    H += cs.c_tilde[n - 1] * h_form(phi, n, fam, 0.0, (n == 1 ? s1 : s2).u1, l[n - 1], k35, F);
  }
  std::vector<double> lx, ly;
  for (double eta = 1e-4; eta <= 1.0001e-2; eta *= std::pow(10.0, 0.25)) {
    lx.push_back(std::log(eta));
    ly.push_back(std::log(std::fabs(composite_energy(add(s, phi, eta), fam, cs, l, k35, F) - comp)));
  }
  const auto [k, b] = line_fit(lx, ly);
  const double coef = std::exp(b);
  report(10, "expansion", std::fabs(k - 2.0) <= 0.1 && std::fabs(coef - H) <= 0.05 * std::fabs(H),
         fmt("response exponent %.5f, coefficient %.6f vs sum c~_n H_n %.6f", k, coef, H));
}

void c11_end_to_end(const PairRun& run) {
  const ShootResult& r = run.r;
  bool ctl = true;
  std::string cd;
  for (std::size_t i = 0; i < run.controls.size(); ++i) {
    const auto& [off, d] = run.controls[i];
    const RunOutcome& o = run.control_runs[i];
    ctl = ctl && !o.reached_limit && o.exit_time < 60.0 && d.dominant;
    cd += fmt("; control %+.2e exits t=%.2f (%s) max|a+| %.3f vs |phi_perp| %.4f", off, o.exit_time,
              to_string(o.reason).c_str(), d.max_a_plus, d.phi_perp);
  }
  const bool ok = r.reached_horizon && r.sup_phi_norm <= r.tube && ctl && run.seconds <= 600.0;
  report(11, "end-to-end", ok,
         fmt("exit %s, sup|phi| %.4f <= tube %.4f, %d runs, %.0f s", r.reached_horizon ? "horizon" : "early",
             r.sup_phi_norm, r.tube, r.total_runs, run.seconds) +
             cd);
}

void c12_identities() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double s = U(rng), a = std::fabs(s);
    const double closed = -0.5 * std::pow(a, 4.0) + (2.0 / 3.0) * std::pow(a, 6.0);
    const double scale = std::max({std::fabs(closed), std::pow(a, 4.0), std::pow(a, 6.0)});
    worst = std::max(worst, std::fabs(s * eval_f(s, k35) - 2.0 * eval_F(s, k35) - closed) / scale);
  }
  const double s0 = find_s0(k35);
  const double lhs = eval_f(s0, k35) - s0;
  const double rhs = (0.5 * std::pow(s0, 4.0) + 2.0 * s0 * s0) / s0;
  const double at_s0 = std::fabs(lhs - rhs) / std::fabs(rhs);
  report(12, "identities", worst <= 1e-10 && at_s0 <= 1e-10,
         fmt("s f - 2F closed form %.2e, identity at s0 %.2e (relative)", worst, at_s0));
}

void guarded(int id, const char* name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  const SpectralData sd = compute_spectral_data(k35, GridSpec{40.0, 2048});
  PairRun run;
  std::string run_error;
  try {
    run = shoot_pair(sd);
  } catch (const std::exception& e) {
    run_error = e.what();
  }
  auto needs_run = [&](int id, const char* name, void (*fn)(const PairRun&)) {
    if (run_error.empty()) {
      guarded(id, name, [&] { fn(run); });
    } else {
      report(id, name, false, "stabilized pair run threw: " + run_error);
    }
  };
  guarded(1, "ground state", c1_ground_state);
  guarded(2, "spectrum", [&] { c2_spectrum(sd); });
  guarded(3, "eigen-identity", [&] { c3_eigen_identity(sd); });
  guarded(4, "coercivity", [&] { c4_coercivity(sd); });
  needs_run(5, "conservation", c5_conservation);
  guarded(6, "transport", [&] { c6_transport(sd); });
  guarded(7, "instability rate", [&] { c7_growth(sd); });
  guarded(8, "coefficients", c8_coefficients);
  needs_run(9, "monotonicity", c9_monotonicity);
  guarded(10, "expansion", c10_expansion);
  needs_run(11, "end-to-end", c11_end_to_end);
  guarded(12, "identities", c12_identities);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
