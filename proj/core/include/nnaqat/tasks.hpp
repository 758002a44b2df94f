// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nnaqat/qnn.hpp"
#include "nnaqat/tensor.hpp"

namespace nnaqat {

enum class TaskKind {
  kAdding,         // regress the sum of two marked values
  kParity,         // XOR of a bit sequence
  kTokenClassify,  // class of the first token of an id sequence
};

enum class Split { kTrain, kVal, kTest };

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);  // throws kInvalidArgument
const char* to_string(Split split);

struct TaskSpec {
  TaskKind kind = TaskKind::kAdding;
  int length = 20;
  int vocab = 16;    // token task only
  int classes = 4;   // token task only
  std::size_t train_size = 2048;
  std::size_t val_size = 512;
  std::size_t test_size = 1024;
  double noise = 0.0;        // Gaussian jitter on real-valued inputs
  double tolerance = 0.04;   // adding task: |prediction - label| below this counts as correct

  void validate() const;  // throws kInvalidArgument
  std::size_t size(Split split) const;

  int input_dim() const;   // feature width per step (embedding width for tokens is chosen by the model)
  int output_dim() const;
  bool regression() const { return kind == TaskKind::kAdding; }
  bool tokens() const { return kind == TaskKind::kTokenClassify; }

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// Sample-major storage: sample i occupies features[i*length*input_dim ...]
// (or ids[i*length ...] for token tasks).
struct Dataset {
  TaskSpec spec;
  Split split = Split::kTrain;
  std::size_t count = 0;
  std::vector<double> features;
  std::vector<int> ids;
  std::vector<double> targets;  // regression labels
  std::vector<int> labels;      // class labels

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Deterministic in (spec, seed, split); splits use independent streams.
Dataset gen_task(const TaskSpec& spec, std::uint64_t seed, Split split);

struct Batch {
  SequenceInput input;  // time-major
  Tensor targets;       // B x 1 for regression
  std::vector<int> labels;
};

// Samples order[begin, begin+count) (or begin.. when order is empty).
Batch make_batch(const Dataset& data, const std::vector<std::size_t>& order, std::size_t begin,
                 std::size_t count);

// Sample i as a list of per-step feature vectors (real-input tasks only).
std::vector<std::vector<double>> sample_steps(const Dataset& data, std::size_t i);

std::string serialize_dataset(const Dataset& data);

}  // namespace nnaqat
