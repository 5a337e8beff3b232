#pragma once

// Ground state Q'' - Q + f(Q) = 0 and the boosted soliton family.

#include <memory>

#include "nlkg/grid.hpp"
#include "nlkg/nonlinearity.hpp"
#include "nlkg/profile.hpp"

namespace nlkg {

// Fine table of Q on [0, 460] (spacing 0.005), cached per exponent pair.
std::shared_ptr<const EvenProfile> ground_state_shape(const PowerPair& pp);

// Q sampled on the grid. Requires Q(X) < 1e-12.
Profile solve_ground_state(const PowerPair& pp, const GridSpec& grid);

// x -> Q(x / sqrt(1 - l^2)), re-sampled on Q's grid.
Profile lorentz_boost(const Profile& Q, double ell);

// (sigma Q_l(x - y), -sigma l Q_l'(x - y)) on Q's grid, Q unboosted.
State soliton_state(const Profile& Q, int sigma, double ell, double y);

// Third derivative of Q from Q''' = Q'(1 - f'(Q)).
inline double q_third(const ProfileValue& q, const PowerPair& pp) {
  return q.d1 * (1.0 - eval_fprime(q.v, pp));
}

double lorentz_factor(double ell);  // sqrt(1 - l^2), rejects |l| >= 1

}  // namespace nlkg
