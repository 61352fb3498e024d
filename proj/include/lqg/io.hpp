#pragma once

#include <string>

#include "lqg/grid.hpp"
#include "lqg/stats.hpp"

namespace lqg {

// Field file: text header (domain tag, nx, ny, bbox, gamma, normalization,
// seed, log_weight; plus bc/periodic extension keys), then a `binary` line
// followed by nx*ny row-major little-endian 64-bit floats. Re-read is
// bit-exact.
void write_field(const std::string& path, const FieldSample& f, double gamma = 0.0);
FieldSample read_field(const std::string& path, double* gamma = nullptr);

std::string normalization_tag(Normalization n);
Normalization normalization_from_tag(const std::string& s);

// Structured JSON report (one object per check).
void write_report_json(const std::string& path, const stats::Report& r);
stats::Report read_report_json(const std::string& path);

} // namespace lqg
