#pragma once

// Time stepping of d/dt u1 = u2, d/dt u2 = u1'' - u1 + f(u1) on the periodic grid.

#include <functional>
#include <string>
#include <vector>

#include "nlkg/grid.hpp"
#include "nlkg/nonlinearity.hpp"

namespace nlkg {

enum class Scheme { strang_spectral, leapfrog_fd4 };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct EvolveConfig {
  double dt = 0.005;
  double t_end = 1.0;
  int record_every = 20;
  Scheme scheme = Scheme::strang_spectral;
};

// dt > 0; dt <= 0.1 (strang_spectral) or dt <= 0.5 dx (leapfrog_fd4); record_every >= 1.
void validate(const EvolveConfig& cfg, const GridSpec& g);

// Smallest half-width keeping waves away from the seam: max|y| + t_end + 20.
double minimum_half_width(const std::vector<double>& centers, double t_end);

constexpr double kBlowUpLevel = 1e6;

class Evolver {
 public:
  Evolver(const PowerPair& pp, const GridSpec& g, const EvolveConfig& cfg);

  // One step of cfg.dt. For strang_spectral any nonzero dt may be passed
  // explicitly (dt < 0 runs backward). Throws BlowUp if max|u1| > 1e6.
  void step(State& s);
  void step(State& s, double dt);
  void advance(State& s, long nsteps);

  const EvolveConfig& config() const { return cfg_; }
  Fourier& fourier() { return F_; }

 private:
  void strang(State& s, double dt);
  void leapfrog(State& s, double dt);
  void kick(State& s, double h);
  void fd4_accel(const Field& u, Field& out);
  void check(const State& s) const;

  PowerPair pp_;
  GridSpec grid_;
  EvolveConfig cfg_;
  Fourier F_;
  double cached_dt_ = 0.0;
  std::vector<double> c_, s_over_w_, w_s_;
  std::vector<std::complex<double>> a_, b_;
  Field tmp_;
  Field prev_u1_;
  double prev_t_ = 0.0;
  bool have_prev_ = false;
};

State step(const State& s, const EvolveConfig& cfg, const PowerPair& pp, const GridSpec& g);

double energy(const State& s, const PowerPair& pp, Fourier& F);
double momentum(const State& s, Fourier& F);

// Evolves to cfg.t_end; calls `record` at t = 0 and every cfg.record_every steps
// (and at the final step). Returning false from `record` stops the run.
void evolve(State& s, const PowerPair& pp, const GridSpec& g, const EvolveConfig& cfg,
            const std::function<bool(const State&)>& record);

}  // namespace nlkg
