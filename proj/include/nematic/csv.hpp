#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nematic {

/// Shortest text that parses back to exactly `x` ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double x);

/// Writes a header line and rows; every value goes through format_double.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace nematic
