#include "nlkg/functionals.hpp"

#include <cmath>
#include <string>

#include "nlkg/errors.hpp"
#include "nlkg/evolution.hpp"
#include "nlkg/ground_state.hpp"

namespace nlkg {

RampValue base_chi(double x) {
  RampValue r;
  if (x <= -1.0) return r;
  if (x >= 1.0) {
    r.v = 1.0;
    return r;
  }
  // s in [0, 1]; chain factors ds/dx = 1/2
  const double s = 0.5 * (x + 1.0), u = 1.0 - s;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
  r.v = s4 * (35.0 - 84.0 * s + 70.0 * s2 - 20.0 * s3);
  r.d1 = 0.5 * 140.0 * s3 * u * u * u;
  r.d2 = 0.25 * 420.0 * s2 * u * u * (1.0 - 2.0 * s);
  r.d3 = 0.125 * 840.0 * s * u * (1.0 - 5.0 * s + 5.0 * s2);
  return r;
}

double CutoffFamily::width(double t) const { return std::pow(t + a, alpha); }

CutoffFamily build_cutoffs(const std::vector<double>& speeds, const std::vector<double>& y0, double L,
                           double alpha) {
  if (!(alpha > kAlphaMin && alpha < kAlphaMax)) {
    throw ValidationError("alpha = " + std::to_string(alpha) + " must lie in (1/2, 4/7)");
  }
  if (!(L > 0.0)) throw ValidationError("L must be positive");
  const std::size_t N = speeds.size();
  if (N == 0 || y0.size() != N) throw ValidationError("speeds and centers must be nonempty and of equal length");
  for (std::size_t n = 1; n < N; ++n) {
    if (!(speeds[n] > speeds[n - 1])) throw ValidationError("speeds must be strictly increasing");
    if (!(y0[n] > y0[n - 1])) throw ValidationError("centers must be strictly increasing");
  }
  CutoffFamily fam;
  fam.alpha = alpha;
  fam.L = L;
  fam.a = std::pow(L / 10.0, 1.0 / alpha);
  fam.beta.assign(N, 0.0);
  fam.ybar0.assign(N, 0.0);
  for (std::size_t n = 1; n < N; ++n) {
    fam.beta[n] = 0.5 * (speeds[n - 1] + speeds[n]);
    fam.ybar0[n] = 0.5 * (y0[n - 1] + y0[n]);
  }
  return fam;
}

namespace {

void check_index(const CutoffFamily& fam, int n, int lo, int hi) {
  if (n < lo || n > hi) {
    throw ValidationError("soliton index " + std::to_string(n) + " outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "] for N = " + std::to_string(fam.size()));
  }
}

// x - b_n t - ybar_n
Field offset_field(const CutoffFamily& fam, int n, double t, const GridSpec& g) {
  Field o(g.points);
  for (int j = 0; j < g.points; ++j) o[j] = g.x(j) - fam.beta[n - 1] * t - fam.ybar0[n - 1];
  return o;
}

double quad(const Field& a, const GridSpec& g) { return a.sum() * g.dx(); }

Field map_f(const Field& u, const PowerPair& pp) {
  Field out;
  apply_f(u, pp, out);
  return out;
}
Field map_F(const Field& u, const PowerPair& pp) {
  Field out;
  apply_F(u, pp, out);
  return out;
}
Field map_fprime(const Field& u, const PowerPair& pp) {
  Field out;
  apply_fprime(u, pp, out);
  return out;
}

}  // namespace

RampValue chi(const CutoffFamily& fam, int n, double t, double x) {
  check_index(fam, n, 1, fam.size() + 1);
  RampValue r;
  if (n == 1) {
    r.v = 1.0;
    return r;
  }
  if (n == fam.size() + 1) return r;
  const double w = fam.width(t);
  const RampValue b = base_chi((x - fam.beta[n - 1] * t - fam.ybar0[n - 1]) / w);
  r.v = b.v;
  r.d1 = b.d1 / w;
  r.d2 = b.d2 / (w * w);
  r.d3 = b.d3 / (w * w * w);
  return r;
}

Field chi_field(const CutoffFamily& fam, int n, double t, const GridSpec& g) {
  Field c(g.points);
  for (int j = 0; j < g.points; ++j) c[j] = chi(fam, n, t, g.x(j)).v;
  return c;
}

Field chi_dx_field(const CutoffFamily& fam, int n, double t, const GridSpec& g) {
  Field c(g.points);
  for (int j = 0; j < g.points; ++j) c[j] = chi(fam, n, t, g.x(j)).d1;
  return c;
}

Field psi_field(const CutoffFamily& fam, int n, double t, const GridSpec& g) {
  check_index(fam, n, 1, fam.size());
  return chi_field(fam, n, t, g) - chi_field(fam, n + 1, t, g);
}

CoefficientSet build_coefficients(const std::vector<double>& speeds) {
  const std::size_t N = speeds.size();
  if (N == 0) throw ValidationError("at least one speed is required");
  for (std::size_t n = 0; n < N; ++n) {
    if (!(std::fabs(speeds[n]) < 1.0)) throw ValidationError("speeds must satisfy |l| < 1");
    if (n > 0 && !(speeds[n] > speeds[n - 1])) throw ValidationError("speeds must be strictly increasing");
  }
  CoefficientSet cs;
  cs.c.assign(N, 0.0);
  cs.c_tilde.assign(N, 1.0);
  cs.c[0] = speeds[0];
  double prod = 1.0;  // prod_{n'=2}^{n-1}
  double acc = 0.0;
  for (std::size_t n = 1; n < N; ++n) {
    const double b = 0.5 * (speeds[n - 1] + speeds[n]);
    cs.c[n] = (speeds[n] - speeds[n - 1]) / (1.0 - b * speeds[n]) * prod;
    prod *= (1.0 - b * speeds[n - 1]) / (1.0 - b * speeds[n]);
    acc += cs.c[n] * b;
    cs.c_tilde[n] = 1.0 + acc;
  }
  const CoefficientResiduals r = coefficient_residuals(cs, speeds);
  double scale = 1.0;
  for (double v : cs.c_tilde) scale = std::max(scale, std::fabs(v));
  if (r.sum_identity > 1e-12 * scale || r.product_identity > 1e-12 * scale) {
    throw NumericalError("coefficient identities violated beyond 1e-12");
  }
  return cs;
}

CoefficientResiduals coefficient_residuals(const CoefficientSet& cs, const std::vector<double>& speeds) {
  CoefficientResiduals r;
  double sum = 0.0, prod = 1.0;
  for (std::size_t n = 0; n < speeds.size(); ++n) {
    sum += cs.c[n];
    if (n > 0) {
      const double b = 0.5 * (speeds[n - 1] + speeds[n]);
      prod *= (1.0 - b * speeds[n - 1]) / (1.0 - b * speeds[n]);
    }
    r.sum_identity = std::max(r.sum_identity, std::fabs(sum - cs.c_tilde[n] * speeds[n]));
    r.product_identity = std::max(r.product_identity, std::fabs(cs.c_tilde[n] - prod));
  }
  return r;
}

double localized_momentum(const State& s, int n, const CutoffFamily& fam, Fourier& F) {
  check_index(fam, n, 1, fam.size());
  const GridSpec& g = F.grid();
  const double b = fam.beta[n - 1];
  const Field d = F.derivative(s.u1);
  const Field c = chi_field(fam, n, s.t, g), cx = chi_dx_field(fam, n, s.t, g);
  const Field integrand =
      (c.array() * d.array() + 0.5 * (1.0 - b * b) * cx.array() * s.u1.array()) * s.u2.array();
  return 2.0 * quad(integrand, g);
}

double localized_energy(const State& s, int n, const CutoffFamily& fam, const PowerPair& pp, Fourier& F) {
  check_index(fam, n, 1, fam.size());
  const GridSpec& g = F.grid();
  const Field d = F.derivative(s.u1);
  const Field c = chi_field(fam, n, s.t, g);
  const Field dens = d.array().square() + s.u1.array().square() + s.u2.array().square() -
                     2.0 * map_F(s.u1, pp).array();
  return quad(dens.cwiseProduct(c), g);
}

double refined_term(const State& s, int n, const CutoffFamily& fam, Fourier& F) {
  check_index(fam, n, 1, fam.size());
  const GridSpec& g = F.grid();
  const Field o = offset_field(fam, n, s.t, g), cx = chi_dx_field(fam, n, s.t, g);
  const Field integrand = o.array() * s.u1.array() * s.u2.array() * cx.array();
  return -fam.alpha / (s.t + fam.a) * quad(integrand, g);
}

double j_functional(const State& s, int n, const CutoffFamily& fam, const PowerPair& pp, Fourier& F) {
  const double b = fam.beta[n - 1];
  return localized_momentum(s, n, fam, F) + b * localized_energy(s, n, fam, pp, F) + b * refined_term(s, n, fam, F);
}

double composite_energy(const State& s, const CutoffFamily& fam, const CoefficientSet& cs,
                        const std::vector<double>& speeds, const PowerPair& pp, Fourier& F) {
  (void)speeds;
  double e = energy(s, pp, F) + cs.c[0] * momentum(s, F);
  for (int n = 2; n <= fam.size(); ++n) e += cs.c[n - 1] * j_functional(s, n, fam, pp, F);
  return e;
}

double h_form(const State& phi, int n, const CutoffFamily& fam, double t, const Field& qn, double ell_n,
              const PowerPair& pp, Fourier& F) {
  check_index(fam, n, 1, fam.size());
  const GridSpec& g = F.grid();
  const Field d = F.derivative(phi.u1);
  const Field psi = psi_field(fam, n, t, g);
  const Field dens = d.array().square() + phi.u1.array().square() + phi.u2.array().square() +
                     2.0 * ell_n * d.array() * phi.u2.array() -
                     map_fprime(qn, pp).array() * phi.u1.array().square();
  return quad(dens.cwiseProduct(psi), g);
}

double ground_energy(const PowerPair& pp, const GridSpec& g) {
  const Profile Q = solve_ground_state(pp, g);
  const State s = soliton_state(Q, 1, 0.0, 0.0);
  Fourier F(g);
  return energy(s, pp, F);
}

double expansion_leading(const CoefficientSet& cs, const std::vector<double>& speeds, double e_q) {
  double sum = 0.0;
  for (std::size_t n = 0; n < speeds.size(); ++n) sum += cs.c_tilde[n] * std::sqrt(1.0 - speeds[n] * speeds[n]);
  return sum * e_q;
}

VirialPieces virial_pieces(const State& s, int n, const CutoffFamily& fam, const PowerPair& pp, Fourier& F) {
  check_index(fam, n, 1, fam.size());
  const GridSpec& g = F.grid();
  const double b = fam.beta[n - 1];
  const Field d = F.derivative(s.u1);
  const Field cx = chi_dx_field(fam, n, s.t, g), o = offset_field(fam, n, s.t, g);
  const Field w = (d + b * s.u2).array().square() * cx.array();
  const Field sf = s.u1.cwiseProduct(map_f(s.u1, pp)) - 2.0 * map_F(s.u1, pp);
  const Field weight = (1.0 - b * b) - fam.alpha * b * o.array() / (s.t + fam.a);
  VirialPieces v;
  v.main = -2.0 * quad(w, g);
  v.weighted = quad(weight.cwiseProduct(sf).cwiseProduct(cx), g);
  return v;
}

MonotonicityReport monotonicity_audit(const std::vector<FunctionalSample>& series, const CutoffFamily& fam,
                                      double gamma0, double C1) {
  MonotonicityReport r;
  if (series.empty()) return r;
  const std::size_t K = series.front().J.size();
  r.j0 = series.front().J;
  r.max_drift.assign(K, 0.0);
  for (const auto& f : series) {
    if (f.J.size() != K) throw ValidationError("functional series has inconsistent J length");
    r.sup_phi_norm = std::max(r.sup_phi_norm, f.phi_norm);
    for (std::size_t k = 0; k < K; ++k) r.max_drift[k] = std::max(r.max_drift[k], f.J[k] - r.j0[k]);
  }
  r.budget = C1 / std::pow(fam.L, 2.0 * fam.alpha - 1.0) * r.sup_phi_norm * r.sup_phi_norm +
             C1 * std::exp(-3.0 * gamma0 * fam.L);
  for (double d : r.max_drift) r.within_budget = r.within_budget && d <= r.budget;
  return r;
}

}  // namespace nlkg
