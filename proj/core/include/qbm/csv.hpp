// csv.hpp: fixed-precision text output shared by the CSV writers

#pragma once

#include <string>

namespace qbm {

/// 12 significant digits, '%.12g' style; negative zero printed as 0.
std::string format_number(double x);

}  // namespace qbm
