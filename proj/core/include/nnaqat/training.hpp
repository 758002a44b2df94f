// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "nnaqat/autodiff.hpp"
#include "nnaqat/checkpoint.hpp"
#include "nnaqat/qnn.hpp"
#include "nnaqat/tasks.hpp"

namespace nnaqat {

enum class HingeForm {
  kTwoSided,  // relu(z_min - z) + relu(z - z_max)
  kLiteral,   // relu(z + z_min) + relu(z - z_max), as printed
};

struct ActivityBounds {
  double z_min = -4.0;
  double z_max = 4.0;
  HingeForm form = HingeForm::kTwoSided;

  void validate() const;  // throws kInvalidArgument unless z_min < z_max
  double hinge(double z) const;
  // Subgradient of hinge; 0 inside the range and at its ends.
  double hinge_grad(double z) const;
};

// Mean of the hinge over every element of every tensor.
Var activity_loss(const std::vector<Var>& z, const ActivityBounds& bounds);
Var activity_loss(const Var& z, const ActivityBounds& bounds);
// Plain-value version of the same quantity.
double activity_value(const Tensor& z, const ActivityBounds& bounds);

double total_loss(double task_loss, double activity, double lambda);
Var total_loss(const Var& task_loss, const Var& activity, double lambda);

// Linear warmup to peak, hold, then exponential decay reaching floor at
// total_steps. peak == floor gives a constant rate.
struct LrSchedule {
  double peak = 3e-3;
  double floor = 1e-4;
  std::size_t warmup = 100;
  std::size_t hold = 1000;
  std::size_t total_steps = 3000;

  void validate() const;
  double at(std::size_t step) const;
  static LrSchedule constant(double lr, std::size_t steps) { return {lr, lr, 0, steps, steps}; }
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 1.0;  // global gradient norm clip; <= 0 disables
};

class Adam {
 public:
  Adam(AdamConfig config, const std::vector<const Tensor*>& params);
  // Updates params in place from grads (same order and shapes).
  void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::size_t t_ = 0;
};

enum class Stage { kOne, kTwo };

struct ModelSpec {
  int hidden = 32;
  int layers = 2;
  int embed_dim = 8;  // token tasks only

  NetworkSpec network_for(const TaskSpec& task) const;
};

struct TrainConfig {
  Stage stage = Stage::kOne;
  double lambda = 2.0;
  ActivityBounds bounds;
  std::size_t steps = 3000;
  std::size_t batch = 32;
  LrSchedule lr;
  AdamConfig adam;
  std::uint64_t seed = 1;
  TaskSpec task;
  ModelSpec model;
  std::size_t eval_every = 0;  // 0: evaluate only at the end
  // PWL tables for the accelerator policy (stage II). Defaults are built when null.
  std::shared_ptr<const TablePair> tables;
  DynamicScaleSet scales = DynamicScaleSet::standard();
  SteConfig ste = SteConfig::clipped_cosine();

  void validate() const;
  // Stage I trains with weights_only(), stage II with the accelerator policy.
  QuantPolicy policy() const;
};

// full_nna(tables) with the given dynamic scales and surrogate gradient.
QuantPolicy accelerator_policy(std::shared_ptr<const TablePair> tables,
                               const DynamicScaleSet& scales = DynamicScaleSet::standard(),
                               const SteConfig& ste = SteConfig::clipped_cosine());

struct EvalOptions {
  ActivityBounds bounds;
  std::vector<double> edges = default_edges();  // histogram bucket edges, ascending
  std::size_t batch = 256;

  static std::vector<double> default_edges();  // -8, -7, ..., 8
};

struct Metrics {
  double metric = 0.0;  // accuracy (within tolerance for regression)
  double task_loss = 0.0;
  double activity = 0.0;
  double out_of_range = 0.0;  // fraction of z outside [z_min, z_max]
  double error_band = 0.0;    // fraction of z with 4 < |z| < 7
  std::size_t z_count = 0;
  // counts[g][k]: gate g (i, f, g, o), bucket k; bucket 0 is below edges[0],
  // bucket edges.size() is at or above edges.back().
  std::vector<std::vector<std::size_t>> histogram;
  std::vector<double> edges;
  std::size_t activation_saturations = 0;  // z beyond the PWL saturation points
  std::size_t cell_saturations = 0;

  std::vector<std::size_t> total_histogram() const;
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

Metrics evaluate(const Network& net, const Dataset& data, const QuantPolicy& policy,
                 const EvalOptions& options = {});

struct TrainResult {
  Checkpoint checkpoint;
  Metrics final_val;
  double initial_loss = 0.0;  // task loss of the first batch
  double final_loss = 0.0;    // mean task loss of the last 50 steps
};

// Metrics records are appended to log (one JSON object per line) when given.
TrainResult stage1_train(const TrainConfig& config, const Dataset& train, const Dataset& val,
                         std::ostream* log = nullptr);
TrainResult stage2_train(const TrainConfig& config, const Checkpoint& init, const Dataset& train,
                         const Dataset& val, std::ostream* log = nullptr);

std::string metrics_json(const Metrics& m);

}  // namespace nnaqat
