#pragma once

/** \file app.hpp
 *  \brief Command-line dispatcher shared by the `manifoldrank` binary and tests.
 *
 * Exit codes: 0 success, 1 usage error, 2 validation error, 3 property
 * violation (verify only).
 */

#include <iosfwd>
#include <string>
#include <vector>

namespace manifoldrank {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitProperty = 3;

/// Environment variable selecting the sweep worker count.
inline constexpr const char* kWorkersEnv = "MANIFOLDRANK_WORKERS";

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace manifoldrank
