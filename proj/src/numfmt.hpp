#pragma once

#include <cstdio>
#include <string>

namespace cavity::detail {

// Shortest round-trippable text for a double; locale-independent for the
// digits we emit, so data files are byte-stable across runs.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace cavity::detail
