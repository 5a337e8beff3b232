#pragma once

// Linearized operators L = -d^2 + 1 - f'(Q) and H_l, the unstable eigenpair
// (nu0, Y), the directions Z0, Z+, Z- and the coercivity check.

#include <Eigen/Dense>
#include <vector>

#include "nlkg/ground_state.hpp"

namespace nlkg {

// Dense Fourier differentiation matrices; D is exactly antisymmetric and D2
// exactly symmetric (Nyquist handled as in Fourier::derivative).
Eigen::MatrixXd spectral_d1_matrix(const GridSpec& g);
Eigen::MatrixXd spectral_d2_matrix(const GridSpec& g);

Eigen::MatrixXd build_L(const Profile& Q, const PowerPair& pp);

struct EigenPair {
  double lambda0 = 0.0;             // -nu0^2
  Profile Y;                        // even, ||Y||_2 = 1, Y(0) > 0
  std::vector<double> lowest;       // three smallest eigenvalues
  Field raw_vector;                 // normalized eigenvector on the grid
};

// Three smallest eigenvalues and the ground eigenvector. Throws NumericalError if
// lambda0 >= 0, or if the second eigenvalue is below -1e-6 (more than one
// negative direction).
EigenPair lowest_eigenpair(const Eigen::MatrixXd& L, const GridSpec& g);

struct SpectralData {
  PowerPair pp;
  GridSpec grid;
  Profile Q;
  double nu0 = 0.0;
  Profile Y;
  std::vector<double> lowest;
  Field raw_vector;
};

SpectralData compute_spectral_data(const PowerPair& pp, const GridSpec& grid = GridSpec{40.0, 2048});

// Directions of the boosted soliton centered at y, evaluated on `grid`.
// Z0 = (Q_l', -l Q_l''); Z+- = ((l Y_l' +- nu0/g Y_l) e^{+-l nu0 x/g}, Y_l e^{+-l nu0 x/g}),
// g = sqrt(1 - l^2), x measured from y. No sign sigma is applied here.
struct EigenDirections {
  double ell = 0.0;
  double y = 0.0;
  double alpha = 0.0;  // nu0 sqrt(1 - l^2)
  State Z0, Zplus, Zminus;
};

EigenDirections build_eigendirections(const SpectralData& sd, double ell, double y, const GridSpec& grid);
EigenDirections build_eigendirections(const SpectralData& sd, double ell, double y);

// Displacements beyond this distance from a soliton center are treated as zero.
constexpr double kProfileWindow = 45.0;

// H_l applied to v, potential centered at y (spectral derivatives).
State apply_H(const SpectralData& sd, double ell, double y, const State& v, Fourier& F);

// Dense 2M x 2M block form of H_l centered at 0.
Eigen::MatrixXd build_H(const SpectralData& sd, double ell, const GridSpec& grid);

struct CoercivityReport {
  double projected = 0.0;    // min eigenvalue on the complement of {Z0, Z+, Z-}
  double unprojected = 0.0;  // min eigenvalue without constraints
  double min_r_ratio = 0.0;  // conditioning of the constraint set
};

// Smallest eigenvalue of the quadratic form of H_l relative to the norm
// sum((Dv1)^2 + v1^2 + v2^2) dx, constrained L2-orthogonal to Z0, Z+, Z-.
CoercivityReport coercivity_constant(const SpectralData& sd, double ell,
                                     const GridSpec& grid = GridSpec{25.0, 512});

// ||H_l J Z+- +- alpha Z+-|| / ||Z+-|| for both signs, J(a, b) = (b, -a).
std::pair<double, double> eigen_identity_residuals(const SpectralData& sd, double ell, const GridSpec& grid);

}  // namespace nlkg
