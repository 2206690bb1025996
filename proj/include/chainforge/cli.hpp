#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chainforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitUsage = 64;

// Entry point of the `chainforge` tool. `args` excludes the program name.
// "-" as an input path reads `in`; without --out results go to `out`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace chainforge::cli
