#pragma once

// Line-delimited dataset format. Each line is a tag followed by
// whitespace-separated numbers printed with 17 significant digits:
//
//   IMU t ax ay az gx gy gz
//   ENC t foot a1 ... a(N-1)
//   CNT t foot {0|1}
//   LC  t_i t_j R(9, row-major) p(3) cov(21, upper triangle row-major)
//   TRU t R(9, row-major) p(3) v(3)
//
// Blank lines and lines starting with '#' are ignored.

#include <filesystem>
#include <istream>
#include <ostream>

#include "legged/sim.hpp"

namespace legged {

void write_dataset(std::ostream& out, const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

/// Throws ParseError with the line number of the first malformed record.
Dataset read_dataset(std::istream& in);
/// Throws ParseError (line 0) when the file cannot be opened.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace legged
