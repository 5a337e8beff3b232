#pragma once

// Initial-data adjustment along the unstable directions and the search for
// unstable amplitudes whose solution stays near the moving soliton sum.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlkg/evolution.hpp"
#include "nlkg/modulation.hpp"

namespace nlkg {

struct SearchConfig {
  double segment = 4.0;          // committed time per segment
  double lookahead = 8.0;        // trial runs extend this far past the segment start
  double mode_threshold = 0.25;  // fraction of the tube radius (in a+ units) that classifies a mode
  int max_runs = 240;            // bracket runs per segment before the pattern search
  int pattern_runs = 80;
  double initial_width = 0.0;    // first bracket step in a+ units; 0 means 0.1 r (segment 0) or 1e-10 r
};

struct ShootSpec {
  PowerPair pp;
  GridSpec grid{104.0, 2048};
  std::vector<int> signs;
  std::vector<double> speeds;
  std::vector<double> centers;
  double L = 40.0;
  double delta = 1e-3;
  double delta_max = 0.05;
  double horizon = 60.0;
  double K_tube = 10.0;
  double C0 = 1.0;
  double tube_floor = 1e-3;
  double ball_radius = 0.0;  // 0 means the formula in ball_radius()
  std::uint64_t seed = 1;
  std::optional<State> epsilon;  // used as given (after the norm check) instead of the seeded field
  EvolveConfig evolve{0.005, 60.0, 20, Scheme::strang_spectral};
  ModulationConfig modulation;
  SearchConfig search;
};

// Speeds/signs/centers consistent; gaps > L; 0 <= delta <= delta_max; horizon > 0;
// the grid leaves room for the run (minimum_half_width); evolve config valid.
void validate(const ShootSpec& s);

// N = 1 uses L = infinity in both radii.
double separation_term(const ShootSpec& s);                      // exp(-gamma0 L)
double tube_radius(const ShootSpec& s);                          // K_tube max(delta + e^{-g0 L}, floor)
double ball_radius(const ShootSpec& s);                          // C0^{3/4} max(sqrt(delta^2 + e^{-2 g0 L}), floor)

// Band-limited random field (seeded) with a smooth envelope around the
// solitons, scaled to H-norm delta.
State make_perturbation(const ShootSpec& s);
double h_norm(const State& v, Fourier& F);

struct PreparedData {
  State u0;
  std::vector<double> h_plus;
  std::vector<double> y_tilde;
  ModulationFrame frame;
  int iterations = 0;
  double residual = 0.0;
};

enum class ExitReason { horizon, tube, modulation_failure, blow_up, classified };
std::string to_string(ExitReason r);

struct RunOutcome {
  double exit_time = 0.0;
  bool reached_limit = false;
  ExitReason reason = ExitReason::horizon;
  std::string detail;
  std::vector<ModulationFrame> frames;
  std::vector<int> exit_signs;     // sign of a+_n when it first crossed the threshold, 0 if never
  std::vector<double> cross_times;
};

struct SegmentRecord {
  double t_start = 0.0;
  std::vector<double> target;
  std::vector<double> h_plus;
  std::vector<double> bracket_width;
  int runs = 0;
  bool pattern_search = false;
  double trial_exit = 0.0;  // exit time of the accepted trial run
};

struct ShootResult {
  std::vector<double> h_plus;
  std::vector<double> y_tilde0;
  std::vector<double> a_plus_target;
  bool reached_horizon = false;
  double exit_time = 0.0;
  double single_trajectory_exit = 0.0;  // exit time of segment 0's trial run
  std::vector<ModulationFrame> trajectory;
  double sup_phi_norm = 0.0;
  double tube = 0.0;
  double ball = 0.0;
  std::vector<SegmentRecord> segments;
  double max_kick = 0.0;  // max |h+| over segments after the first
  int total_runs = 0;
};

// Called on each committed frame with the corresponding state.
using FrameObserver = std::function<void(const State&, const ModulationFrame&)>;

class Shooter {
 public:
  Shooter(const SpectralData& sd, ShootSpec spec);

  const ShootSpec& spec() const { return spec_; }
  const State& epsilon() const { return eps_; }
  Decomposer& decomposer() { return dec_; }
  double tube() const { return tube_; }
  double ball() const { return ball_; }
  double mode_threshold(int n) const;

  // base + sum_n h_n Z+_n(. - y_ref_n) with (phi, Z0_n) = 0 and (phi, Z+_n) = target_n.
  // Throws NewtonDiverged.
  PreparedData prepare(const State& base, const std::vector<double>& y_ref, const std::vector<double>& target);
  // The unperturbed data sum sigma_n Q_n(. - y0_n) + epsilon.
  State initial_base() const;
  PreparedData prepare_initial_data(const std::vector<double>& target);

  // Evolves u0 until t_limit or a tube exit. With classify = true the run also
  // stops once every mode has crossed its threshold.
  RunOutcome run(const State& u0, const std::vector<double>& y_guess, double t_limit, bool classify = false,
                 const FrameObserver& observer = {}, State* state_at = nullptr, double t_capture = 0.0);
  RunOutcome run_until_exit(const State& u0);

  ShootResult shoot(const FrameObserver& observer = {});

 private:
  const SpectralData& sd_;
  ShootSpec spec_;
  Decomposer dec_;
  State eps_;
  double tube_ = 0.0, ball_ = 0.0;
  std::vector<double> z_plus_sq_;
};

// Convenience wrapper: validates, builds the spectral data at the spec's grid
// resolution, and shoots.
ShootResult shoot(const ShootSpec& spec, const FrameObserver& observer = {});

// phi is split by least squares over the growing and decaying modes J Z-+_n and
// the translations Z0_n; phi_perp is the L2 norm of the remainder. `unstable` is
// the L2 size max_n |c_n| ||J Z-_n|| of the growing component.
struct DominanceReport {
  double max_a_plus = 0.0;
  double unstable = 0.0;
  double phi_perp = 0.0;
  bool dominant = false;  // max_a_plus >= 10 phi_perp
};
DominanceReport exit_dominance(Decomposer& D, const State& s, const ModulationFrame& f);

// max_t max_n |ydot_n - l_n| / (delta + e^{-gamma0 L}) over a frame series.
double ydot_bound_ratio(const std::vector<ModulationFrame>& frames, const ShootSpec& s);

// Finite-difference db/dt at the first crossing of b = sum (a+_n)^2 through level;
// nullopt if b never crosses.
std::optional<double> transversality_rate(const std::vector<ModulationFrame>& frames, double level);

}  // namespace nlkg
