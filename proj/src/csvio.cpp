#include "vdep/csvio.hpp"

#include <cmath>

#include <fmt/format.h>

namespace vdep {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string csv_num(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.{}f}", v, decimals);
}

}  // namespace vdep
