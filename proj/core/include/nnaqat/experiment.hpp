// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nnaqat/training.hpp"

namespace nnaqat {

// Baseline vs accelerator-aware training on one task, repeated per seed.
struct ExperimentConfig {
  TaskSpec task;
  ModelSpec model;
  ActivityBounds bounds;
  AdamConfig adam;
  double lambda = 2.0;
  std::size_t batch = 32;
  std::size_t stage1_steps = 3000;
  LrSchedule stage1_lr{3e-3, 1e-4, 100, 1000, 3000};
  std::size_t stage2_steps = 300;
  double stage2_lr = 1e-3;
  std::size_t eval_every = 0;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::shared_ptr<const TablePair> tables;  // defaults when null
  DynamicScaleSet scales = DynamicScaleSet::standard();
  SteConfig ste = SteConfig::clipped_cosine();
  EvalOptions eval;

  void validate() const;
  // Stage I config for one seed; lambda overrides the configured value.
  TrainConfig stage1_config(std::uint64_t seed, double lambda) const;
  TrainConfig stage2_config(std::uint64_t seed) const;
  std::shared_ptr<const TablePair> resolved_tables() const;
};

struct SeedResult {
  std::uint64_t seed = 0;
  Metrics baseline_fp;  // weights-only policy, lambda = 0
  Metrics baseline_q;   // same checkpoint on the accelerator policy (PTQ)
  Metrics stage1_fp;
  Metrics stage1_q;
  Metrics stage2_q;
  TrainResult baseline;
  TrainResult stage1;
  TrainResult stage2;
};

struct ExperimentResult {
  std::vector<SeedResult> seeds;
};

// Relative change of metric against reference in percent; positive is better.
double relative_delta(double metric, double reference);

// Runs every seed. When out_dir is given, checkpoints, training logs,
// evaluation records and the summary are written there as each stage
// completes.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Text table with one row per model (FP baseline, PTQ baseline, stage I, stage II).
std::string format_summary(const ExperimentResult& result);
std::string summary_json(const ExperimentResult& result);

}  // namespace nnaqat
