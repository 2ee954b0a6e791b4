#pragma once

#include <string>
#include <string_view>

namespace stockhmm {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

// Emits "warning: <message>" on stderr. Library diagnostics only; results
// never go through this channel.
void warn(std::string_view message);

}  // namespace stockhmm
