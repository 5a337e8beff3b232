#pragma once

// CSV export and checksums. Numbers are written with %.17g so identical runs
// produce byte-identical files.

#include <string>
#include <vector>

#include "nlkg/functionals.hpp"
#include "nlkg/grid.hpp"
#include "nlkg/modulation.hpp"

namespace nlkg {

std::string format_double(double v);

// Throws ValidationError if the file cannot be opened.
void write_profile_csv(const std::string& path, const GridSpec& g, const Field& v, const std::string& column);
void write_snapshot_csv(const std::string& path, const GridSpec& g, const State& s);
// t, y_n, ydot_n, a_plus_n, a_minus_n, phi_norm, theta
void write_frames_csv(const std::string& path, const std::vector<ModulationFrame>& frames);
// t, E, I, J_n (n >= 2), composite, H_n (when present), phi_norm, budget
void write_functionals_csv(const std::string& path, const std::vector<FunctionalSample>& series,
                           const std::vector<double>& budget);

std::string sha256_file(const std::string& path);

}  // namespace nlkg
