#pragma once

#include <string>
#include <vector>

namespace vdep {

// Plain comma splitting; none of the pipeline formats carry quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

// Fixed-width float formatting so rerunning a stage reproduces reports
// byte for byte. NaN prints as "nan".
std::string csv_num(double v, int decimals = 6);

}  // namespace vdep
