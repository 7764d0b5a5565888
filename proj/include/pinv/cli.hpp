/**
 * @file cli.hpp
 * @brief `run`, `scan`, and `selftest` subcommands.
 *
 * Exit codes: 0 success, 1 configuration error, 2 numerical failure.
 * Settings resolve as flag > PARETO_SEED (seed only) > --config JSON > default.
 */

#ifndef PINV_CLI_HPP
#define PINV_CLI_HPP

#include <iosfwd>

namespace pinv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pinv

#endif  // PINV_CLI_HPP
