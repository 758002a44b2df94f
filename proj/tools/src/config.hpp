// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "nnaqat/experiment.hpp"

namespace nnaqat::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kEnvPrefix = "NNAQAT_";

// Every key the config accepts, with its default value.
Json default_config();

// defaults <- config file <- NNAQAT_* environment <- command-line flags.
// Unknown keys and type mismatches throw ErrorCode::kInvalidArgument.
Json resolve_config(const std::optional<std::filesystem::path>& file,
                    const std::optional<std::uint64_t>& seed_flag,
                    const std::optional<std::string>& out_flag);

// Applies one override to a config document: key is "section.name" or a
// top-level name; value is parsed as JSON, falling back to a string.
void apply_override(Json& config, const std::string& key, const std::string& value);

ExperimentConfig experiment_config(const Json& config);
TrainConfig train_config(const Json& config, Stage stage);
std::shared_ptr<const TablePair> load_tables(const Json& config);
EvalOptions eval_options(const Json& config);

std::filesystem::path out_dir(const Json& config);
void write_resolved(const Json& config);

}  // namespace nnaqat::cli
