#include "stockhmm/util.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <system_error>

namespace stockhmm {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
  }
  return std::string(buf, ptr);
}

void warn(std::string_view message) {
  std::cerr << "warning: " << message << "\n";
}

}  // namespace stockhmm
