#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace budgetseg {

// Exit codes: 0 success, 1 input/structural error, 2 no feasible
// configuration, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNoFeasible = 2;
inline constexpr int kExitNumerical = 3;

// Runs the budgetseg command line (cost | search | kernels | upsample |
// validate) against the given streams. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace budgetseg
