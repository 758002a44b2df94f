// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "config.hpp"

namespace nnaqat::cli {

// Stable process exit codes.
enum Exit : int {
  kExitOk = 0,
  kExitFailure = 1,     // I/O and other unexpected errors
  kExitConfig = 2,      // bad flags or config document
  kExitInvariant = 3,   // malformed files, violated invariants, unmet error budgets
  kExitDivergence = 4,  // golden mismatch or non-finite training loss
};

using Path = std::filesystem::path;

int tables_build(const Json& config, const std::optional<Path>& from);
int tables_inspect(const Json& config, const Path& file);
int tables_export(const Json& config, const Path& file);
int analyze(const Json& config, const Path& checkpoint, const std::string& policy,
            const std::string& split);
int golden_input(const Json& config, const Path& checkpoint, std::size_t steps, const Path& out);
int golden_generate(const Json& config, const Path& checkpoint, const Path& input,
                    const Path& table, const Path& trace);
int golden_verify(const Json& config, const Path& checkpoint, const Path& input,
                  const Path& table, const Path& trace);
int train(const Json& config, int stage, const std::optional<Path>& init);
int experiment(const Json& config);

}  // namespace nnaqat::cli
