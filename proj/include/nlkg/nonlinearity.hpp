#pragma once

// Double-power nonlinearity f(s) = |s|^{p-1}s - |s|^{q-1}s and its companions.

#include <Eigen/Core>

namespace nlkg {

struct PowerPair {
  double q = 3.0;
  double p = 5.0;
};

// Throws ValidationError unless 1 < q < p < inf.
void validate(const PowerPair& pp);

// |s|^a, with 0 at s = 0. Integer exponents use repeated multiplication.
double abs_pow(double s, double a);

double eval_f(double s, const PowerPair& pp);
double eval_F(double s, const PowerPair& pp);
double eval_fprime(double s, const PowerPair& pp);

// s f(s) - 2 F(s)
double defocusing_combination(double s, const PowerPair& pp);

// Smallest positive root of F(s) - s^2/2.
double find_s0(const PowerPair& pp);

struct ExponentConstants {
  double q_star;
  double p_star;
  double gamma0;
};

ExponentConstants exponent_constants(const PowerPair& pp);

// Elementwise versions used in the time stepper and quadratures.
void apply_f(const Eigen::VectorXd& u, const PowerPair& pp, Eigen::VectorXd& out);
void apply_F(const Eigen::VectorXd& u, const PowerPair& pp, Eigen::VectorXd& out);
void apply_fprime(const Eigen::VectorXd& u, const PowerPair& pp, Eigen::VectorXd& out);

}  // namespace nlkg
