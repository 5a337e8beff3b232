#pragma once

// Decomposition u = sum_n Q_n(. - y_n) + phi with (phi, Z0_n) = 0, unstable and
// stable amplitudes a+-_n = (phi, Z+-_n), and the modulation diagnostics.

#include <vector>

#include "nlkg/spectral.hpp"

namespace nlkg {

struct SolitonConfig {
  std::vector<int> signs;
  std::vector<double> speeds;
  std::vector<double> centers;
  double L = 0.0;  // separation parameter; 0 means unset (N = 1)
};

// N >= 1, equal lengths, signs +-1, |l| < 1, speeds strictly increasing,
// centers strictly increasing with gaps > L.
void validate(const SolitonConfig& c);

struct ModulationConfig {
  int max_iterations = 50;
  double tolerance = 1e-10;    // on max_n |(phi, Z0_n)|
  double min_separation = 5.0;  // configured surrogate for the minimal gap L0
  double max_step = 5.0;        // larger Newton updates count as leaving the basin
};

struct ModulationFrame {
  double t = 0.0;
  std::vector<double> y;
  std::vector<double> a_plus;
  std::vector<double> a_minus;
  State phi;  // empty unless requested
  double phi_norm = 0.0;  // sqrt(sum((D phi1)^2 + phi1^2 + phi2^2) dx)
  double theta = 0.0;
  std::vector<double> orthogonality;  // (phi, Z0_n) at the returned centers
  std::vector<double> z0_norms;       // ||Z0_n||_L2
  int iterations = 0;
  std::vector<double> residual_history;           // max_n |F_n| per iteration
  std::vector<std::vector<double>> y_history;     // iterates, starting with the guess
};

class Decomposer {
 public:
  Decomposer(const SpectralData& sd, const GridSpec& grid, std::vector<int> signs, std::vector<double> speeds,
             ModulationConfig cfg = {});

  // Throws NoConvergence (not converged in max_iterations, non-finite, or step
  // beyond max_step) and CrossingCenters (centers not increasing or closer than
  // min_separation).
  ModulationFrame decompose(const State& s, const std::vector<double>& guess_y, bool keep_phi = false);

  State soliton_sum(const std::vector<double>& y) const;
  // Z0_n including the sign sigma_n; Z+-_n without it.
  EigenDirections directions(int n, double y) const;
  // Amplitudes and norm of an arbitrary residual against centers y.
  void measure(const State& phi, const std::vector<double>& y, ModulationFrame& f);
  double h_norm(const State& phi);

  // sum_n (ydot_n - l_n) d/dx Q_n and -sum_n (ydot_n - l_n) l_n d^2/dx^2 Q_n.
  State mod_vector(const std::vector<double>& y, const std::vector<double>& ydot) const;
  // d^2 phi1 - phi1 + f(sum Q_n + phi1) - sum f(Q_n)
  Field phi_forcing(const State& phi, const std::vector<double>& y);

  int size() const { return static_cast<int>(signs_.size()); }
  const std::vector<int>& signs() const { return signs_; }
  const std::vector<double>& speeds() const { return speeds_; }
  const GridSpec& grid() const { return grid_; }
  const SpectralData& spectral() const { return sd_; }
  double theta(const std::vector<double>& y) const;
  Fourier& fourier() { return F_; }

 private:
  struct Window {
    std::vector<int> idx;
    std::vector<double> d;
  };
  Window window(double y) const;

  const SpectralData& sd_;
  GridSpec grid_;
  std::vector<int> signs_;
  std::vector<double> speeds_;
  ModulationConfig cfg_;
  double gamma0_;
  Fourier F_;
};

struct ModulationDiagnostics {
  std::vector<double> ydot;
  std::vector<double> ratio;  // |ydot_n - l_n| / (||phi|| + theta)
};

// One-sided difference between consecutive frames.
ModulationDiagnostics modulation_residuals(const ModulationFrame& frame, const ModulationFrame& prev,
                                           const std::vector<double>& speeds);

// Centered differences along a series (one-sided at the ends).
std::vector<std::vector<double>> ydot_series(const std::vector<ModulationFrame>& frames);

struct GrowthFit {
  double slope = 0.0;
  int samples = 0;
  double t_first = 0.0;
  double t_last = 0.0;
};

// Least-squares slope of log|a_n| over the longest run of consecutive frames with
// floor <= |a_n| <= ceiling. `plus` selects a+ (true) or a- (false).
// Throws WindowTooShort with fewer than 10 samples.
GrowthFit exponential_mode_rates(const std::vector<ModulationFrame>& frames, int n, bool plus, double floor,
                                 double ceiling);

}  // namespace nlkg
