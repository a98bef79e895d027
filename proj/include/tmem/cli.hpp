#pragma once

// Command pipeline behind the tmem executable.

#include <iosfwd>
#include <string>
#include <vector>

#include "tmem/io.hpp"

namespace tmem {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitSelftest = 1, kExitConfig = 2, kExitNumerical = 3 };

/// Each command writes into cfg.out_dir and returns the file names it produced.
std::vector<std::string> cmd_calibrate(const RunConfig& cfg, std::ostream& log);
std::vector<std::string> cmd_mermin(const RunConfig& cfg, std::ostream& log);
std::vector<std::string> cmd_sweep(const RunConfig& cfg, std::ostream& log);
std::vector<std::string> cmd_qpt(const RunConfig& cfg, std::ostream& log);
/// Prints one line per check and returns kExitOk or kExitSelftest.
int cmd_selftest(std::uint64_t seed, bool inject_fault, std::ostream& log);

/// Parses arguments, runs the command and maps failures onto exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tmem
