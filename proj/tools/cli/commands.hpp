#pragma once

#include <iosfwd>

#include "config.hpp"

namespace dlambert::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

// Writes <out_dir>/summary.json and, if enabled, <out_dir>/arc_<kind>.csv.
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Writes <out_dir>/sweep.csv.
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Prints the friction-field checks and, given a trajectory CSV, the
// damping-factor and energy verdicts.
int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line: subcommand, flags, config loading, error mapping.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dlambert::cli
