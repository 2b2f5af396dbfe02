/**
 * @file cli.hpp
 * @brief The `epivax` command-line front end.
 */
#pragma once

#include <ostream>

namespace epivax {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation, I/O or solver error
inline constexpr int kExitUsage = 2;

/**
 * Runs one command line. argv[0] is the program name.
 * Results go to `out`; diagnostics go to `err`. Never throws.
 */
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace epivax
