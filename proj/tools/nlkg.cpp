// nlkg: batch front-end for the soliton laboratory.
//
//   nlkg <subcommand> --config run.toml --out DIR [--seed N] [--sweep K]
//
// Subcommands: ground-state, spectrum, evolve, decompose, functionals, shoot.
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <fftw3.h>
#include <openssl/crypto.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <boost/version.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <toml.hpp>

#include "nlkg/errors.hpp"
#include "nlkg/evolution.hpp"
#include "nlkg/functionals.hpp"
#include "nlkg/ground_state.hpp"
#include "nlkg/io.hpp"
#include "nlkg/modulation.hpp"
#include "nlkg/shooting.hpp"
#include "nlkg/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace nlkg;

namespace {

constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------- config

struct RunConfig {
  PowerPair pp{3.0, 5.0};
  GridSpec grid{40.0, 2048};
  GridSpec spectral_grid{40.0, 2048};
  std::vector<int> signs{1};
  std::vector<double> speeds{0.0};
  std::vector<double> centers{0.0};
  double L = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 1;
  EvolveConfig evolve;
  int snapshot_every = 0;  // in records; 0 writes only the first and last snapshot
  ModulationConfig modulation;
  double alpha = 0.55;
  double C1 = 10.0;
  std::vector<double> spectrum_speeds{0.0, 0.3, -0.3, 0.6, -0.6};
  GridSpec coercivity_grid{25.0, 512};
  ShootSpec shoot;
  bool controls = false;
};

const std::map<std::string, std::set<std::string>> kKeys = {
    {"nonlinearity", {"q", "p"}},
    {"grid", {"half_width", "points"}},
    {"spectral_grid", {"half_width", "points"}},
    {"solitons", {"signs", "speeds", "centers", "L"}},
    {"perturbation", {"delta", "seed"}},
    {"evolve", {"dt", "t_end", "record_every", "scheme", "snapshot_every"}},
    {"modulation", {"max_iterations", "tolerance", "min_separation", "max_step"}},
    {"functionals", {"alpha", "C1"}},
    {"spectrum", {"speeds", "coercivity_half_width", "coercivity_points"}},
    {"shoot",
     {"horizon", "K_tube", "C0", "tube_floor", "ball_radius", "delta_max", "segment", "lookahead", "mode_threshold",
      "max_runs", "pattern_runs", "initial_width", "controls"}},
};

json toml_to_json(const std::string& path) {
  toml::table tbl;
  try {
    tbl = toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    throw ValidationError("cannot parse TOML config '" + path + "': " + std::string(e.description()));
  }
  std::stringstream ss;
  ss << toml::json_formatter{tbl};
  return json::parse(ss.str());
}

json load_config_file(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("config file '" + path + "' does not exist");
  json j;
  if (fs::path(path).extension() == ".toml") {
    j = toml_to_json(path);
  } else {
    std::ifstream in(path);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError("cannot parse JSON config '" + path + "': " + e.what());
    }
  }
  // a manifest carries the resolved config
  if (j.contains("manifest_version") && j.contains("config")) return j["config"];
  return j;
}

template <class T>
void read(const json& j, const char* sec, const char* key, T& out) {
  if (!j.contains(sec) || !j[sec].contains(key)) return;
  try {
    out = j[sec][key].get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config value ") + sec + "." + key + " has the wrong type");
  }
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a table/object");
  for (const auto& [sec, body] : j.items()) {
    auto it = kKeys.find(sec);
    if (it == kKeys.end()) throw ValidationError("unknown config section [" + sec + "]");
    if (!body.is_object()) throw ValidationError("config section [" + sec + "] must be a table");
    for (const auto& [key, v] : body.items()) {
      (void)v;
      if (!it->second.count(key)) throw ValidationError("unknown config key " + sec + "." + key);
    }
  }
  RunConfig c;
  read(j, "nonlinearity", "q", c.pp.q);
  read(j, "nonlinearity", "p", c.pp.p);
  read(j, "grid", "half_width", c.grid.half_width);
  read(j, "grid", "points", c.grid.points);
  read(j, "spectral_grid", "half_width", c.spectral_grid.half_width);
  read(j, "spectral_grid", "points", c.spectral_grid.points);
  read(j, "solitons", "signs", c.signs);
  read(j, "solitons", "speeds", c.speeds);
  read(j, "solitons", "centers", c.centers);
  read(j, "solitons", "L", c.L);
  read(j, "perturbation", "delta", c.delta);
  read(j, "perturbation", "seed", c.seed);
  read(j, "evolve", "dt", c.evolve.dt);
  read(j, "evolve", "t_end", c.evolve.t_end);
  read(j, "evolve", "record_every", c.evolve.record_every);
  std::string scheme = to_string(c.evolve.scheme);
  read(j, "evolve", "scheme", scheme);
  c.evolve.scheme = scheme_from_string(scheme);
  read(j, "evolve", "snapshot_every", c.snapshot_every);
  read(j, "modulation", "max_iterations", c.modulation.max_iterations);
  read(j, "modulation", "tolerance", c.modulation.tolerance);
  read(j, "modulation", "min_separation", c.modulation.min_separation);
  read(j, "modulation", "max_step", c.modulation.max_step);
  read(j, "functionals", "alpha", c.alpha);
  read(j, "functionals", "C1", c.C1);
  read(j, "spectrum", "speeds", c.spectrum_speeds);
  read(j, "spectrum", "coercivity_half_width", c.coercivity_grid.half_width);
  read(j, "spectrum", "coercivity_points", c.coercivity_grid.points);
  ShootSpec& s = c.shoot;
  read(j, "shoot", "horizon", s.horizon);
  read(j, "shoot", "K_tube", s.K_tube);
  read(j, "shoot", "C0", s.C0);
  read(j, "shoot", "tube_floor", s.tube_floor);
  read(j, "shoot", "ball_radius", s.ball_radius);
  read(j, "shoot", "delta_max", s.delta_max);
  read(j, "shoot", "segment", s.search.segment);
  read(j, "shoot", "lookahead", s.search.lookahead);
  read(j, "shoot", "mode_threshold", s.search.mode_threshold);
  read(j, "shoot", "max_runs", s.search.max_runs);
  read(j, "shoot", "pattern_runs", s.search.pattern_runs);
  read(j, "shoot", "initial_width", s.search.initial_width);
  read(j, "shoot", "controls", c.controls);
  if (!(c.alpha > kAlphaMin && c.alpha < kAlphaMax)) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "functionals.alpha = %g must lie in (1/2, 4/7)", c.alpha);
    throw ValidationError(msg);
  }
  return c;
}

json to_json(const RunConfig& c) {
  json j;
  j["nonlinearity"] = {{"q", c.pp.q}, {"p", c.pp.p}};
  j["grid"] = {{"half_width", c.grid.half_width}, {"points", c.grid.points}};
  j["spectral_grid"] = {{"half_width", c.spectral_grid.half_width}, {"points", c.spectral_grid.points}};
  j["solitons"] = {{"signs", c.signs}, {"speeds", c.speeds}, {"centers", c.centers}, {"L", c.L}};
  j["perturbation"] = {{"delta", c.delta}, {"seed", c.seed}};
  j["evolve"] = {{"dt", c.evolve.dt},
                 {"t_end", c.evolve.t_end},
                 {"record_every", c.evolve.record_every},
                 {"scheme", to_string(c.evolve.scheme)},
                 {"snapshot_every", c.snapshot_every}};
  j["modulation"] = {{"max_iterations", c.modulation.max_iterations},
                     {"tolerance", c.modulation.tolerance},
                     {"min_separation", c.modulation.min_separation},
                     {"max_step", c.modulation.max_step}};
  j["functionals"] = {{"alpha", c.alpha}, {"C1", c.C1}};
  j["spectrum"] = {{"speeds", c.spectrum_speeds},
                   {"coercivity_half_width", c.coercivity_grid.half_width},
                   {"coercivity_points", c.coercivity_grid.points}};
  const ShootSpec& s = c.shoot;
  j["shoot"] = {{"horizon", s.horizon},
                {"K_tube", s.K_tube},
                {"C0", s.C0},
                {"tube_floor", s.tube_floor},
                {"ball_radius", s.ball_radius},
                {"delta_max", s.delta_max},
                {"segment", s.search.segment},
                {"lookahead", s.search.lookahead},
                {"mode_threshold", s.search.mode_threshold},
                {"max_runs", s.search.max_runs},
                {"pattern_runs", s.search.pattern_runs},
                {"initial_width", s.search.initial_width},
                {"controls", c.controls}};
  return j;
}

SolitonConfig solitons(const RunConfig& c) { return SolitonConfig{c.signs, c.speeds, c.centers, c.L}; }

ShootSpec shoot_spec(const RunConfig& c) {
  ShootSpec s = c.shoot;
  s.pp = c.pp;
  s.grid = c.grid;
  s.signs = c.signs;
  s.speeds = c.speeds;
  s.centers = c.centers;
  s.L = c.L;
  s.delta = c.delta;
  s.seed = c.seed;
  s.evolve = c.evolve;
  s.evolve.t_end = s.horizon;
  s.modulation = c.modulation;
  return s;
}

// ---------------------------------------------------------------- runs

struct Output {
  fs::path dir;
  std::vector<std::string> files;
  json summary;

  std::string path(const std::string& name) {
    files.push_back(name);
    fs::create_directories((dir / name).parent_path());
    return (dir / name).string();
  }
};

// sum sigma_n Q_n + epsilon, with epsilon seeded as in the shooting module
State initial_state(const RunConfig& c) {
  validate(solitons(c));
  const Profile Q = solve_ground_state(c.pp, c.grid);
  State s = zero_state(c.grid);
  for (std::size_t n = 0; n < c.signs.size(); ++n) {
    const State q = soliton_state(Q, c.signs[n], c.speeds[n], c.centers[n]);
    s.u1 += q.u1;
    s.u2 += q.u2;
  }
  if (c.delta > 0.0) {
    ShootSpec sp;
    sp.grid = c.grid;
    sp.centers = c.centers;
    sp.delta = c.delta;
    sp.seed = c.seed;
    const State e = make_perturbation(sp);
    s.u1 += e.u1;
    s.u2 += e.u2;
  }
  return s;
}

void cmd_ground_state(const RunConfig& c, Output& out) {
  const Profile Q = solve_ground_state(c.pp, c.grid);
  write_profile_csv(out.path("q_profile.csv"), c.grid, Q.values, "Q");
  Fourier F(c.grid);
  const Field d2 = F.derivative(Q.values, 2);
  double res = 0.0;
  for (int j = 0; j < c.grid.points; ++j) {
    if (std::fabs(c.grid.x(j)) <= 0.75 * c.grid.half_width) {
      res = std::max(res, std::fabs(d2[j] - Q.values[j] + eval_f(Q.values[j], c.pp)));
    }
  }
  const double x1 = std::min(20.0, 0.5 * c.grid.half_width);
  out.summary = {{"s0", find_s0(c.pp)},
                 {"Q0", Q.at(0.0).v},
                 {"interior_residual", res},
                 {"tail_log_slope", fitted_log_slope(Q, 0.5 * x1, x1)},
                 {"gamma0", exponent_constants(c.pp).gamma0}};
}

void cmd_spectrum(const RunConfig& c, Output& out) {
  const SpectralData sd = compute_spectral_data(c.pp, c.spectral_grid);
  write_profile_csv(out.path("eigenfunction.csv"), sd.grid, sd.Y.values, "Y");
  const Eigen::MatrixXd L = build_L(sd.Q, c.pp);
  Fourier F(sd.grid);
  const Field dq = F.derivative(sd.Q.values);
  json per = json::array();
  for (double l : c.spectrum_speeds) {
    const auto [rp, rm] = eigen_identity_residuals(sd, l, sd.grid);
    const CoercivityReport cr = coercivity_constant(sd, l, c.coercivity_grid);
    per.push_back({{"ell", l},
                   {"alpha", sd.nu0 * lorentz_factor(l)},
                   {"identity_residual_plus", rp},
                   {"identity_residual_minus", rm},
                   {"coercivity_projected", cr.projected},
                   {"coercivity_unprojected", cr.unprojected}});
  }
  out.summary = {{"nu0", sd.nu0},
                 {"lowest_eigenvalues", sd.lowest},
                 {"kernel_residual", (L * dq).norm() / dq.norm()},
                 {"speeds", per}};
}

struct Recorder {
  const RunConfig& c;
  Output& out;
  Fourier F;
  std::vector<std::array<double, 3>> conserved;
  int records = 0;
  State last;

  Recorder(const RunConfig& cfg, Output& o) : c(cfg), out(o), F(cfg.grid) {}

  void operator()(const State& s) {
    conserved.push_back({s.t, energy(s, c.pp, F), momentum(s, F)});
    if (records == 0 || (c.snapshot_every > 0 && records % c.snapshot_every == 0)) snapshot(s);
    last = s;
    ++records;
  }
  void snapshot(const State& s) {
    char name[64];
    std::snprintf(name, sizeof name, "snapshots/snap_%06d.csv", records);
    write_snapshot_csv(out.path(name), c.grid, s);
  }
  void finish() {
    if (!(c.snapshot_every > 0 && (records - 1) % c.snapshot_every == 0) && records > 1) {
      --records;
      snapshot(last);
      ++records;
    }
    std::ofstream f(out.path("conserved.csv"), std::ios::binary);
    f << "t,E,I\n";
    for (const auto& r : conserved) f << format_double(r[0]) << "," << format_double(r[1]) << "," << format_double(r[2]) << "\n";
    const double e0 = conserved.front()[1], i0 = conserved.front()[2];
    double de = 0.0, di = 0.0;
    for (const auto& r : conserved) {
      de = std::max(de, std::fabs(r[1] - e0));
      di = std::max(di, std::fabs(r[2] - i0));
    }
    out.summary["energy_drift"] = de;
    out.summary["momentum_drift"] = di;
    out.summary["t_final"] = conserved.back()[0];
  }
};

void check_grid_room(const RunConfig& c) {
  const double need = minimum_half_width(c.centers, c.evolve.t_end);
  if (c.grid.half_width < need) {
    throw ValidationError("grid half-width " + std::to_string(c.grid.half_width) + " below max|y| + t_end + 20 = " +
                          std::to_string(need));
  }
}

void cmd_evolve(const RunConfig& c, Output& out) {
  check_grid_room(c);
  State s = initial_state(c);
  Recorder rec(c, out);
  evolve(s, c.pp, c.grid, c.evolve, [&](const State& st) {
    rec(st);
    return true;
  });
  rec.finish();
}

// evolve + decompose, optionally with the localized functionals
void tracked_run(const RunConfig& c, Output& out, bool functionals) {
  check_grid_room(c);
  const SpectralData sd = compute_spectral_data(c.pp, c.spectral_grid);
  Decomposer D(sd, c.grid, c.signs, c.speeds, c.modulation);
  State s = initial_state(c);
  Recorder rec(c, out);
  std::vector<ModulationFrame> frames;
  std::vector<FunctionalSample> samples;
  const int N = static_cast<int>(c.signs.size());
  std::optional<CutoffFamily> fam;
  std::optional<CoefficientSet> cs;
  if (functionals) {
    fam = build_cutoffs(c.speeds, c.centers, N > 1 ? c.L : 10.0, c.alpha);
    cs = build_coefficients(c.speeds);
  }
  const Profile Q = solve_ground_state(c.pp, c.grid);
  std::vector<double> y = c.centers;
  std::string failure;
  try {
    evolve(s, c.pp, c.grid, c.evolve, [&](const State& st) {
      rec(st);
      ModulationFrame f = D.decompose(st, y, functionals);
      y = f.y;
      if (functionals) {
        FunctionalSample fs;
        fs.t = st.t;
        fs.E = energy(st, c.pp, rec.F);
        fs.I = momentum(st, rec.F);
        for (int n = 2; n <= N; ++n) fs.J.push_back(j_functional(st, n, *fam, c.pp, rec.F));
        fs.composite = composite_energy(st, *fam, *cs, c.speeds, c.pp, rec.F);
        for (int n = 1; n <= N; ++n) {
          const State qn = soliton_state(Q, c.signs[n - 1], c.speeds[n - 1], f.y[n - 1]);
          fs.H.push_back(h_form(f.phi, n, *fam, st.t, qn.u1, c.speeds[n - 1], c.pp, rec.F));
        }
        fs.phi_norm = f.phi_norm;
        samples.push_back(fs);
        f.phi = State{};
      }
      frames.push_back(std::move(f));
      return true;
    });
  } catch (const NumericalError& e) {
    failure = e.what();
  }
  rec.finish();
  write_frames_csv(out.path("frames.csv"), frames);
  double ratio = 0.0;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    const ModulationDiagnostics md = modulation_residuals(frames[k], frames[k - 1], c.speeds);
    for (double r : md.ratio) ratio = std::max(ratio, r);
  }
  out.summary["max_ydot_ratio"] = ratio;
  if (functionals && !samples.empty()) {
    const double g0 = exponent_constants(c.pp).gamma0;
    std::vector<double> budget;
    std::vector<FunctionalSample> upto;
    for (const auto& smp : samples) {
      upto.push_back(smp);
      budget.push_back(monotonicity_audit(upto, *fam, g0, c.C1).budget);
    }
    write_functionals_csv(out.path("functionals.csv"), samples, budget);
    const MonotonicityReport r = monotonicity_audit(samples, *fam, g0, c.C1);
    out.summary["monotonicity"] = {{"max_drift", r.max_drift},
                                   {"J0", r.j0},
                                   {"sup_phi_norm", r.sup_phi_norm},
                                   {"budget", r.budget},
                                   {"within_budget", r.within_budget}};
    const double lead = expansion_leading(*cs, c.speeds, ground_energy(c.pp, c.grid));
    out.summary["expansion_leading"] = lead;
  }
  if (!failure.empty()) throw NumericalError(failure);
}

bool max_abs_in_ball(const std::vector<double>& a, double r) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s) <= r;
}

void cmd_shoot(const RunConfig& c, Output& out) {
  const ShootSpec spec = shoot_spec(c);
  validate(spec);
  const SpectralData sd = compute_spectral_data(c.pp, c.spectral_grid);
  Shooter sh(sd, spec);
  const int N = static_cast<int>(c.signs.size());
  const CutoffFamily fam = build_cutoffs(c.speeds, c.centers, N > 1 ? c.L : 10.0, c.alpha);
  const CoefficientSet cs = build_coefficients(c.speeds);
  Fourier F(c.grid);
  std::vector<FunctionalSample> samples;
  ShootResult r;
  try {
    r = sh.shoot([&](const State& st, const ModulationFrame& f) {
      FunctionalSample fs;
      fs.t = st.t;
      fs.E = energy(st, c.pp, F);
      fs.I = momentum(st, F);
      for (int n = 2; n <= N; ++n) fs.J.push_back(j_functional(st, n, fam, c.pp, F));
      fs.composite = composite_energy(st, fam, cs, c.speeds, c.pp, F);
      fs.phi_norm = f.phi_norm;
      samples.push_back(fs);
    });
  } catch (const SearchExhausted& e) {
    out.summary = {{"exit_time", e.longest_exit_time}, {"error", e.what()}};
    throw;
  }
  write_frames_csv(out.path("frames.csv"), r.trajectory);
  const double g0 = exponent_constants(c.pp).gamma0;
  std::vector<double> budget;
  std::vector<FunctionalSample> upto;
  for (const auto& smp : samples) {
    upto.push_back(smp);
    budget.push_back(monotonicity_audit(upto, fam, g0, c.C1).budget);
  }
  write_functionals_csv(out.path("functionals.csv"), samples, budget);
  const MonotonicityReport mr = monotonicity_audit(samples, fam, g0, c.C1);

  json segs = json::array();
  for (const auto& s : r.segments) {
    json widths = json::array();
    for (double w : s.bracket_width) widths.push_back(std::isfinite(w) ? json(w) : json(nullptr));
    segs.push_back({{"t_start", s.t_start},
                    {"target", s.target},
                    {"h_plus", s.h_plus},
                    {"bracket_width", widths},
                    {"runs", s.runs},
                    {"pattern_search", s.pattern_search},
                    {"trial_exit", s.trial_exit}});
  }
  json rep = {{"exit_time", r.reached_horizon ? json("horizon") : json(r.exit_time)},
              {"horizon", spec.horizon},
              {"h_plus", r.h_plus},
              {"y_tilde0", r.y_tilde0},
              {"a_plus_target", r.a_plus_target},
              {"inside_ball", max_abs_in_ball(r.a_plus_target, r.ball)},
              {"sup_phi_norm", r.sup_phi_norm},
              {"tube_radius", r.tube},
              {"ball_radius", r.ball},
              {"single_trajectory_exit", r.single_trajectory_exit},
              {"max_segment_kick", r.max_kick},
              {"total_runs", r.total_runs},
              {"ydot_bound_ratio", ydot_bound_ratio(r.trajectory, spec)},
              {"monotonicity",
               {{"max_drift", mr.max_drift}, {"budget", mr.budget}, {"within_budget", mr.within_budget}}},
              {"segments", segs}};
  if (c.controls) {
    json ctl = json::array();
    for (double sgn : {1.0, -1.0}) {
      std::vector<double> t = r.a_plus_target;
      t[0] += sgn * 10.0 * r.ball;
      const PreparedData p = sh.prepare_initial_data(t);
      State at;
      const RunOutcome o = sh.run(p.u0, p.y_tilde, spec.horizon, false, [&](const State& st, const ModulationFrame&) {
        at = st;
      });
      const DominanceReport d = exit_dominance(sh.decomposer(), at, o.frames.back());
      ctl.push_back({{"offset", sgn * 10.0 * r.ball},
                     {"exit_time", o.reached_limit ? json("horizon") : json(o.exit_time)},
                     {"reason", to_string(o.reason)},
                     {"exit_sign", o.exit_signs[0]},
                     {"max_a_plus", d.max_a_plus},
                     {"unstable", d.unstable},
                     {"phi_perp", d.phi_perp},
                     {"dominant", d.dominant}});
    }
    rep["controls"] = ctl;
  }
  std::ofstream(out.path("report.json"), std::ios::binary) << rep.dump(2) << "\n";
  out.summary = {{"exit_time", rep["exit_time"]}, {"sup_phi_norm", r.sup_phi_norm}, {"tube_radius", r.tube}};
}

// ---------------------------------------------------------------- driver

json versions() {
  return {{"nlkg", kVersion},
          {"fftw", std::string(fftw_version)},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::string(BOOST_LIB_VERSION)},
          {"openssl", std::string(OpenSSL_version(OPENSSL_VERSION))}};
}

int run_one(const std::string& sub, const RunConfig& c, const fs::path& dir) {
  Output out{dir, {}, json::object()};
  fs::create_directories(dir);
  int code = 0;
  std::string error;
  try {
    if (sub == "ground-state") {
      validate(c.pp);
      validate(c.grid);
      cmd_ground_state(c, out);
    } else if (sub == "spectrum") {
      cmd_spectrum(c, out);
    } else if (sub == "evolve") {
      cmd_evolve(c, out);
    } else if (sub == "decompose") {
      tracked_run(c, out, false);
    } else if (sub == "functionals") {
      tracked_run(c, out, true);
    } else if (sub == "shoot") {
      cmd_shoot(c, out);
    }
  } catch (const ValidationError& e) {
    code = 2;
    error = e.what();
  } catch (const NumericalError& e) {
    code = 3;
    error = e.what();
  }
  json m;
  m["manifest_version"] = 1;
  m["subcommand"] = sub;
  m["status"] = code == 0 ? "ok" : (code == 2 ? "validation_error" : "numerical_failure");
  if (!error.empty()) m["error"] = error;
  m["config"] = to_json(c);
  m["versions"] = versions();
  m["summary"] = out.summary;
  json sums = json::object();
  std::sort(out.files.begin(), out.files.end());
  out.files.erase(std::unique(out.files.begin(), out.files.end()), out.files.end());
  for (const auto& f : out.files) {
    if (fs::exists(dir / f)) sums[f] = sha256_file((dir / f).string());
  }
  m["outputs"] = sums;
  std::ofstream(dir / "manifest.json", std::ios::binary) << m.dump(2) << "\n";
  if (code != 0) std::cerr << "nlkg " << sub << ": " << error << "\n";
  return code;
}

int thread_cap() {
  if (const char* s = std::getenv("NLKG_NUM_THREADS")) {
    const int n = std::atoi(s);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlkg: multi-soliton laboratory for the double-power Klein-Gordon equation"};
  app.require_subcommand(1);
  std::string config, out_dir = "out";
  std::optional<std::uint64_t> seed;
  int sweep = 1;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"ground-state", "ground state profile and checks"},
      {"spectrum", "unstable eigenpair, eigen-identities and coercivity"},
      {"evolve", "evolve a soliton sum plus seeded perturbation"},
      {"decompose", "evolve and track the modulation decomposition"},
      {"functionals", "evolve, decompose and audit the localized functionals"},
      {"shoot", "search the unstable amplitudes for a solution staying in the tube"}};
  for (const auto& [name, help] : subs) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config, "TOML or JSON config (a manifest.json also works)");
    s->add_option("--out", out_dir, "output directory");
    s->add_option("--seed", seed, "perturbation seed (overrides the config)");
    s->add_option("--sweep", sweep, "run K seeds (seed, seed+1, ...) in parallel")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  RunConfig c;
  try {
    if (!config.empty()) c = parse_config(load_config_file(config));
    if (seed) c.seed = *seed;
  } catch (const ValidationError& e) {
    std::cerr << "nlkg " << sub << ": " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "nlkg " << sub << ": " << e.what() << "\n";
    return 3;
  }
  if (sweep == 1) return run_one(sub, c, out_dir);

  std::atomic<int> next{0}, worst{0};
  std::vector<std::thread> pool;
  const int T = std::min(thread_cap(), sweep);
  for (int w = 0; w < T; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < sweep; i = next++) {
        RunConfig ci = c;
        ci.seed = c.seed + static_cast<std::uint64_t>(i);
        char name[32];
        std::snprintf(name, sizeof name, "run_%03d", i);
        const int rc = run_one(sub, ci, fs::path(out_dir) / name);
        int cur = worst.load();
        while (rc > cur && !worst.compare_exchange_weak(cur, rc)) {
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  return worst.load();
}
