#pragma once

// Moving cut-offs chi_n / psi_n, the weights c_n / c~_n, the localized momentum
// and energy pieces I_n, E_n, F_n, J_n, the composite functional, and the
// quadratic forms H_n. Soliton indices n are 1-based throughout this header.

#include <vector>

#include "nlkg/grid.hpp"
#include "nlkg/nonlinearity.hpp"

namespace nlkg {

// Degree-7 smoothstep rescaled to [-1, 1]: 0 for x <= -1, 1 for x >= 1.
struct RampValue {
  double v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};
RampValue base_chi(double x);

struct CutoffFamily {
  double alpha = 0.55;
  double a = 0.0;  // (L/10)^(1/alpha)
  double L = 0.0;
  std::vector<double> beta;   // beta[0] = beta_1 = 0
  std::vector<double> ybar0;  // ybar0[0] unused
  int size() const { return static_cast<int>(beta.size()); }
  double width(double t) const;  // (t + a)^alpha
};

constexpr double kAlphaMin = 0.5;
constexpr double kAlphaMax = 4.0 / 7.0;

// Rejects alpha outside (1/2, 4/7), non-increasing speeds, L <= 0.
CutoffFamily build_cutoffs(const std::vector<double>& speeds, const std::vector<double>& y0, double L,
                           double alpha = 0.55);

// chi_n(t, x) with x-derivatives; chi_1 = 1 and chi_{N+1} = 0.
RampValue chi(const CutoffFamily& fam, int n, double t, double x);
Field chi_field(const CutoffFamily& fam, int n, double t, const GridSpec& g);
Field chi_dx_field(const CutoffFamily& fam, int n, double t, const GridSpec& g);
Field psi_field(const CutoffFamily& fam, int n, double t, const GridSpec& g);

struct CoefficientSet {
  std::vector<double> c;
  std::vector<double> c_tilde;
};

struct CoefficientResiduals {
  double sum_identity = 0.0;      // max_n |sum_{n'<=n} c_n' - c~_n l_n|
  double product_identity = 0.0;  // max_n |c~_n - prod (1 - b l_{n'-1}) / (1 - b l_n')|
};

CoefficientSet build_coefficients(const std::vector<double>& speeds);
CoefficientResiduals coefficient_residuals(const CoefficientSet& cs, const std::vector<double>& speeds);

// Global functionals are in evolution.hpp (energy, momentum).
double localized_momentum(const State& s, int n, const CutoffFamily& fam, Fourier& F);
double localized_energy(const State& s, int n, const CutoffFamily& fam, const PowerPair& pp, Fourier& F);
double refined_term(const State& s, int n, const CutoffFamily& fam, Fourier& F);
double j_functional(const State& s, int n, const CutoffFamily& fam, const PowerPair& pp, Fourier& F);
double composite_energy(const State& s, const CutoffFamily& fam, const CoefficientSet& cs,
                        const std::vector<double>& speeds, const PowerPair& pp, Fourier& F);

// H_n(phi, phi); qn holds the values of the n-th soliton's first component.
double h_form(const State& phi, int n, const CutoffFamily& fam, double t, const Field& qn, double ell_n,
              const PowerPair& pp, Fourier& F);

// E(Q, 0) of the standing ground state, computed on g.
double ground_energy(const PowerPair& pp, const GridSpec& g);

// sum_n c~_n sqrt(1 - l_n^2) E(Q)
double expansion_leading(const CoefficientSet& cs, const std::vector<double>& speeds, double e_q);

// The two pieces of dJ_n/dt isolated in the monotonicity argument:
// main = -2 int (u1' + b u2)^2 chi_n', weighted = int [1 - b^2 - ...](u1 f - 2F) chi_n'.
struct VirialPieces {
  double main = 0.0;
  double weighted = 0.0;
};
VirialPieces virial_pieces(const State& s, int n, const CutoffFamily& fam, const PowerPair& pp, Fourier& F);

struct FunctionalSample {
  double t = 0.0;
  double E = 0.0;
  double I = 0.0;
  std::vector<double> J;  // J[k] = J_{k+2}
  double composite = 0.0;
  std::vector<double> H;  // H[k] = H_{k+1}; empty when phi is unavailable
  double phi_norm = 0.0;
};

struct MonotonicityReport {
  std::vector<double> max_drift;  // max_t (J_n(t) - J_n(0)), n = 2..N
  std::vector<double> j0;
  double sup_phi_norm = 0.0;
  double budget = 0.0;  // C1 / L^(2 alpha - 1) sup ||phi||^2 + C1 exp(-3 gamma0 L)
  bool within_budget = true;
};

MonotonicityReport monotonicity_audit(const std::vector<FunctionalSample>& series, const CutoffFamily& fam,
                                      double gamma0, double C1 = 10.0);

}  // namespace nlkg
