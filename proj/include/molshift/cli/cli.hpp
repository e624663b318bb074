//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_CLI_CLI_HPP_
#define MOLSHIFT_CLI_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace molshift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

struct CliResult {
  int exit_code = kExitOk;
  // Empty unless a run directory was created.
  std::filesystem::path run_dir;
};

/// Runs one `molshift` command; `args` excludes the program name. Prints a
/// one-line summary to `out` on success and a diagnostic line to `err`
/// otherwise.
CliResult run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace molshift::cli

#endif  // MOLSHIFT_CLI_CLI_HPP_
