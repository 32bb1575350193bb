#pragma once

#include "dcp/model.hpp"

#include <iosfwd>
#include <string>

namespace dcp {

/// Columnar text format: a header line with the values `n h d model seed`,
/// then one row `i x_1 ... x_d` per observation, 17 significant digits.
void write_path(std::ostream& out, const PathSample& path);
PathSample read_path(std::istream& in);

void save_path(const std::string& file, const PathSample& path);
PathSample load_path(const std::string& file);

/// Two-column `k value` rows.
void write_curve(std::ostream& out, const std::vector<double>& values);

}  // namespace dcp
