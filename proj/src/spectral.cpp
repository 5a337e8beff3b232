#include "nlkg/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "nlkg/errors.hpp"

namespace nlkg {

namespace {

constexpr double kTailThreshold = 1e-8;
constexpr double kTableSpacing = 0.005;

double smallest_generalized(Eigen::MatrixXd A, Eigen::MatrixXd B) {
  const lapack_int n = static_cast<lapack_int>(A.rows());
  std::vector<double> w(n);
  std::vector<lapack_int> ifail(n);
  double zdummy = 0.0;
  lapack_int m = 0;
  const lapack_int info = LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'N', 'I', 'U', n, A.data(), n, B.data(), n, 0.0, 0.0,
                                         1, 1, 0.0, &m, w.data(), &zdummy, 1, ifail.data());
  if (info != 0) throw NumericalError("dsygvx failed with info=" + std::to_string(info));
  return w[0];
}

}  // namespace

Eigen::MatrixXd spectral_d1_matrix(const GridSpec& g) {
  const int M = g.points;
  const double s = M_PI / g.half_width;
  std::vector<double> v(M, 0.0);
  for (int m = 1; m < M / 2; ++m) {
    v[m] = s * 0.5 * ((m % 2) ? -1.0 : 1.0) / std::tan(m * M_PI / M);
    v[M - m] = -v[m];
  }
  Eigen::MatrixXd D(M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) D(i, j) = v[((i - j) % M + M) % M];
  return D;
}

Eigen::MatrixXd spectral_d2_matrix(const GridSpec& g) {
  const int M = g.points;
  const double s2 = std::pow(M_PI / g.half_width, 2);
  std::vector<double> v(M, 0.0);
  v[0] = -s2 * (static_cast<double>(M) * M / 12.0 + 1.0 / 6.0);
  for (int m = 1; m <= M / 2; ++m) {
    const double sn = std::sin(m * M_PI / M);
    v[m] = -s2 * ((m % 2) ? -1.0 : 1.0) / (2.0 * sn * sn);
    v[M - m] = v[m];
  }
  Eigen::MatrixXd D2(M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) D2(i, j) = v[((i - j) % M + M) % M];
  return D2;
}

Eigen::MatrixXd build_L(const Profile& Q, const PowerPair& pp) {
  Eigen::MatrixXd L = -spectral_d2_matrix(Q.grid);
  for (int j = 0; j < Q.grid.points; ++j) L(j, j) += 1.0 - eval_fprime(Q.values[j], pp);
  return L;
}

EigenPair lowest_eigenpair(const Eigen::MatrixXd& Lin, const GridSpec& g) {
  const lapack_int n = static_cast<lapack_int>(Lin.rows());
  if (n != g.points) throw ValidationError("operator size does not match the grid");
  Eigen::MatrixXd A = Lin;
  std::vector<double> w(n);
  Eigen::MatrixXd Z(n, 3);
  std::vector<lapack_int> isuppz(6);
  lapack_int m = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, A.data(), n, 0.0, 0.0, 1, 3, 0.0, &m,
                                         w.data(), Z.data(), n, isuppz.data());
  if (info != 0 || m != 3) throw NumericalError("dsyevr failed with info=" + std::to_string(info));
  EigenPair out;
  out.lowest.assign(w.begin(), w.begin() + 3);
  out.lambda0 = w[0];
  if (!(out.lambda0 < 0.0)) throw NumericalError("linearized operator has no negative eigenvalue");
  if (out.lowest[1] < -1e-6) throw NumericalError("linearized operator has more than one negative eigenvalue");

  const int M = g.points;
  const double dx = g.dx();
  Field v = Z.col(0);
  Field sym(M);
  for (int j = 0; j < M; ++j) sym[j] = 0.5 * (v[j] + v[(M - j) % M]);
  if (sym[M / 2] < 0.0) sym = -sym;
  sym /= std::sqrt(sym.squaredNorm() * dx);
  out.raw_vector = sym;

  const double nu0 = std::sqrt(-out.lambda0);
  const int P = std::max(1, static_cast<int>(std::ceil(dx / kTableSpacing)));
  RefinedSample r = fourier_refine(sym, g, P);
  const int i0 = M * P / 2;
  const double vmax = r.v[i0];
  std::vector<double> tv, td1, td2;
  for (int i = i0; i < M * P; ++i) {
    tv.push_back(r.v[i]);
    td1.push_back(r.d1[i]);
    td2.push_back(r.d2[i]);
    if (std::fabs(r.v[i]) < kTailThreshold * vmax) break;
  }
  td1[0] = 0.0;
  auto shape = std::make_shared<const EvenProfile>(r.dx, std::move(tv), std::move(td1), std::move(td2),
                                                    std::sqrt(1.0 + nu0 * nu0));
  out.Y = sample_profile(shape, g, 1.0, std::sqrt(1.0 + nu0 * nu0));
  return out;
}

SpectralData compute_spectral_data(const PowerPair& pp, const GridSpec& grid) {
  SpectralData sd;
  sd.pp = pp;
  sd.grid = grid;
  sd.Q = solve_ground_state(pp, grid);
  EigenPair ep = lowest_eigenpair(build_L(sd.Q, pp), grid);
  sd.nu0 = std::sqrt(-ep.lambda0);
  sd.Y = ep.Y;
  sd.lowest = ep.lowest;
  sd.raw_vector = ep.raw_vector;
  return sd;
}

EigenDirections build_eigendirections(const SpectralData& sd, double ell, double y) {
  return build_eigendirections(sd, ell, y, sd.grid);
}

EigenDirections build_eigendirections(const SpectralData& sd, double ell, double y, const GridSpec& grid) {
  const double g = lorentz_factor(ell);
  EigenDirections e;
  e.ell = ell;
  e.y = y;
  e.alpha = sd.nu0 * g;
  e.Z0 = zero_state(grid);
  e.Zplus = zero_state(grid);
  e.Zminus = zero_state(grid);
  const double window = std::min(kProfileWindow, grid.half_width);
  const double rate = ell * sd.nu0 / g;
  double ymax = 0.0, zmax = 0.0;
  for (int j = 0; j < grid.points; ++j) {
    const double d = wrap_displacement(grid.x(j), y, grid);
    if (std::fabs(d) > window) continue;
    const double z = d / g;
    const ProfileValue q = sd.Q.shape->eval(z);
    const ProfileValue yv = sd.Y.shape->eval(z);
    e.Z0.u1[j] = q.d1 / g;
    e.Z0.u2[j] = -ell * q.d2 / (g * g);
    const double w = std::exp(rate * d);
    const double dY = yv.d1 / g;
    e.Zplus.u1[j] = (ell * dY + sd.nu0 / g * yv.v) * w;
    e.Zplus.u2[j] = yv.v * w;
    e.Zminus.u1[j] = (ell * dY - sd.nu0 / g * yv.v) / w;
    e.Zminus.u2[j] = yv.v / w;
    ymax = std::max(ymax, std::fabs(yv.v));
    zmax = std::max({zmax, std::fabs(e.Zplus.u1[j]), std::fabs(e.Zminus.u1[j]), std::fabs(e.Zplus.u2[j]),
                     std::fabs(e.Zminus.u2[j])});
  }
  if (zmax > 1e6 * ymax) throw ValidationError("speed too large: weighted unstable direction exceeds 1e6 max|Y|");
  return e;
}

State apply_H(const SpectralData& sd, double ell, double y, const State& v, Fourier& F) {
  const GridSpec& grid = F.grid();
  const double g = lorentz_factor(ell);
  Field d2a = F.derivative(v.u1, 2);
  Field da = F.derivative(v.u1, 1);
  Field db = F.derivative(v.u2, 1);
  State out = zero_state(grid);
  for (int j = 0; j < grid.points; ++j) {
    const double d = wrap_displacement(grid.x(j), y, grid);
    const double Ql = sd.Q.shape->value(d / g);
    out.u1[j] = -d2a[j] + v.u1[j] - eval_fprime(Ql, sd.pp) * v.u1[j] - ell * db[j];
    out.u2[j] = ell * da[j] + v.u2[j];
  }
  return out;
}

Eigen::MatrixXd build_H(const SpectralData& sd, double ell, const GridSpec& grid) {
  const int M = grid.points;
  const double g = lorentz_factor(ell);
  Eigen::MatrixXd D = spectral_d1_matrix(grid);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  H.topLeftCorner(M, M) = -spectral_d2_matrix(grid);
  for (int j = 0; j < M; ++j) {
    const double Ql = sd.Q.shape->value(grid.x(j) / g);
    H(j, j) += 1.0 - eval_fprime(Ql, sd.pp);
    H(M + j, M + j) = 1.0;
  }
  H.topRightCorner(M, M) = -ell * D;
  H.bottomLeftCorner(M, M) = ell * D;
  return H;
}

CoercivityReport coercivity_constant(const SpectralData& sd, double ell, const GridSpec& grid) {
  validate(grid);
  const int M = grid.points;
  EigenDirections e = build_eigendirections(sd, ell, 0.0, grid);
  Eigen::MatrixXd H = build_H(sd, ell, grid);
  Eigen::MatrixXd D = spectral_d1_matrix(grid);
  Eigen::MatrixXd N = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  N.topLeftCorner(M, M) = D.transpose() * D + Eigen::MatrixXd::Identity(M, M);
  N.bottomRightCorner(M, M) = Eigen::MatrixXd::Identity(M, M);

  Eigen::MatrixXd C(2 * M, 3);
  const State* dirs[3] = {&e.Z0, &e.Zplus, &e.Zminus};
  for (int k = 0; k < 3; ++k) {
    C.col(k).head(M) = dirs[k]->u1;
    C.col(k).tail(M) = dirs[k]->u2;
    C.col(k).normalize();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C);
  Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(3, 3).triangularView<Eigen::Upper>();
  CoercivityReport rep;
  rep.min_r_ratio = R.diagonal().cwiseAbs().minCoeff() / R.diagonal().cwiseAbs().maxCoeff();
  if (rep.min_r_ratio < 1e-10) throw NumericalError("constraint directions are rank-deficient");
  Eigen::MatrixXd Qfull = qr.householderQ();
  Eigen::MatrixXd W = Qfull.rightCols(2 * M - 3);
  Eigen::MatrixXd A = W.transpose() * H * W;
  Eigen::MatrixXd B = W.transpose() * N * W;
  A = 0.5 * (A + A.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();
  rep.projected = smallest_generalized(A, B);
  rep.unprojected = smallest_generalized(H, N);
  return rep;
}

std::pair<double, double> eigen_identity_residuals(const SpectralData& sd, double ell, const GridSpec& grid) {
  EigenDirections e = build_eigendirections(sd, ell, 0.0, grid);
  Fourier F(grid);
  auto resid = [&](const State& Z, double sign) {
    State JZ;
    JZ.u1 = Z.u2;
    JZ.u2 = -Z.u1;
    State HJ = apply_H(sd, ell, 0.0, JZ, F);
    const double num = (HJ.u1 + sign * e.alpha * Z.u1).squaredNorm() + (HJ.u2 + sign * e.alpha * Z.u2).squaredNorm();
    const double den = Z.u1.squaredNorm() + Z.u2.squaredNorm();
    return std::sqrt(num / den);
  };
  return {resid(e.Zplus, 1.0), resid(e.Zminus, -1.0)};
}

}  // namespace nlkg
