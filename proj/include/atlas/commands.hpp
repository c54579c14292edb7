// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Pipeline subcommands. Each reads a RunConfig and writes stable filenames
// under the configured output directory.

#pragma once

#include <iosfwd>

#include "atlas/config.hpp"

namespace atlas::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_calibrate(const RunConfig& cfg, std::ostream& log);
void cmd_map(const RunConfig& cfg, std::ostream& log);
void cmd_zonal(const RunConfig& cfg, std::ostream& log);
void cmd_eval(const RunConfig& cfg, std::ostream& log);

/// Full command line handling; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace atlas::cli
