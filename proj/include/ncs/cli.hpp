#pragma once

// Command implementations behind the ncs executable. Each returns the process
// exit code: 0 converged, 1 input error, 2 numerical failure.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ncs/solvers.hpp"

namespace ncs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNumerical = 2;

struct CliInvocation {
  std::string subcommand;
  std::string input;  // path, or inline JSON when it starts with '{' or '['
  std::string method = "all";
  std::optional<std::string> guess_file;
  std::optional<double> near_radius;
  std::optional<std::size_t> k;
  SolverConfig solver;
  std::optional<std::string> format;
  std::string output;  // empty writes to the output stream
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

int solve_command(const CliInvocation& inv, std::ostream& out, std::ostream& err);
int bench_command(const CliInvocation& inv, std::ostream& out, std::ostream& err);
int verify_complexity_command(const CliInvocation& inv, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ncs::cli
