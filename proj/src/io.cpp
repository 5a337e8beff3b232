#include "nlkg/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <memory>

#include "nlkg/errors.hpp"

namespace nlkg {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

void write_profile_csv(const std::string& path, const GridSpec& g, const Field& v, const std::string& column) {
  std::ofstream f = open_out(path);
  f << "x," << column << "\n";
  for (int j = 0; j < g.points; ++j) f << format_double(g.x(j)) << "," << format_double(v[j]) << "\n";
}

void write_snapshot_csv(const std::string& path, const GridSpec& g, const State& s) {
  std::ofstream f = open_out(path);
  f << "x,u1,u2\n";
  for (int j = 0; j < g.points; ++j) {
    f << format_double(g.x(j)) << "," << format_double(s.u1[j]) << "," << format_double(s.u2[j]) << "\n";
  }
}

void write_frames_csv(const std::string& path, const std::vector<ModulationFrame>& frames) {
  std::ofstream f = open_out(path);
  const std::size_t N = frames.empty() ? 0 : frames.front().y.size();
  const auto yd = ydot_series(frames);
  f << "t";
  for (std::size_t n = 1; n <= N; ++n) f << ",y_" << n;
  for (std::size_t n = 1; n <= N; ++n) f << ",ydot_" << n;
  for (std::size_t n = 1; n <= N; ++n) f << ",a_plus_" << n;
  for (std::size_t n = 1; n <= N; ++n) f << ",a_minus_" << n;
  f << ",phi_norm,theta\n";
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const ModulationFrame& fr = frames[k];
    f << format_double(fr.t);
    for (double v : fr.y) f << "," << format_double(v);
    for (std::size_t n = 0; n < N; ++n) f << "," << (yd.empty() ? "" : format_double(yd[k][n]));
    for (double v : fr.a_plus) f << "," << format_double(v);
    for (double v : fr.a_minus) f << "," << format_double(v);
    f << "," << format_double(fr.phi_norm) << "," << format_double(fr.theta) << "\n";
  }
}

void write_functionals_csv(const std::string& path, const std::vector<FunctionalSample>& series,
                           const std::vector<double>& budget) {
  std::ofstream f = open_out(path);
  const std::size_t NJ = series.empty() ? 0 : series.front().J.size();
  const std::size_t NH = series.empty() ? 0 : series.front().H.size();
  f << "t,E,I";
  for (std::size_t k = 0; k < NJ; ++k) f << ",J_" << k + 2;
  f << ",composite";
  for (std::size_t k = 0; k < NH; ++k) f << ",H_" << k + 1;
  f << ",phi_norm,budget\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const FunctionalSample& s = series[i];
    f << format_double(s.t) << "," << format_double(s.E) << "," << format_double(s.I);
    for (double v : s.J) f << "," << format_double(v);
    f << "," << format_double(s.composite);
    for (std::size_t k = 0; k < NH; ++k) f << "," << (k < s.H.size() ? format_double(s.H[k]) : "");
    f << "," << format_double(s.phi_norm) << "," << (i < budget.size() ? format_double(budget[i]) : "") << "\n";
  }
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace nlkg
