// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "ksafem/config.hpp"

namespace ksafem {

struct RunOverrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  int exit_code = 0;      // 0 clean, 2 invalid config, 3 stage failure
  std::string message;    // stage attribution on failure
  std::string output_dir;
};

/// Drives one adaptive run from a validated config: streams
/// `convergence.csv` (flushed per iteration), writes `summary.txt` with the
/// fitted slopes, and optional per-iteration VTK dumps.
RunOutcome run(const RunConfig& config, const RunOverrides& overrides = {});

/// Convenience wrapper: parse + run; parse errors map to exit code 2
/// without creating any file.
RunOutcome run_config_text(const std::string& text, const RunOverrides& overrides = {});

}  // namespace ksafem
