#pragma once

#include <complex>
#include <string>

namespace zflow {

inline constexpr const char* kVersion = "zflow 0.1.0";

// Parses "1.5", "-2i", "1.5+0.2i", "1.5-2e-3i".
std::complex<double> parse_complex(const std::string& text);

int run_cli(int argc, const char* const* argv);

}  // namespace zflow
