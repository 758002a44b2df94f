// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/tasks.hpp"

#include <random>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "nnaqat/error.hpp"

namespace nnaqat {

const char* to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kAdding: return "adding";
    case TaskKind::kParity: return "parity";
    case TaskKind::kTokenClassify: return "token";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "adding") return TaskKind::kAdding;
  if (name == "parity") return TaskKind::kParity;
  if (name == "token") return TaskKind::kTokenClassify;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown task '{}' (expected adding, parity or token)", name));
}

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

void TaskSpec::validate() const {
  if (length < 2) throw Error(ErrorCode::kInvalidArgument, "task length must be at least 2");
  if (tokens() && (vocab < 2 || classes < 2 || classes > vocab)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("token task needs 2 <= classes <= vocab (got {} classes, vocab {})",
                            classes, vocab));
  }
  if (!(noise >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise must be non-negative");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be positive");
}

std::size_t TaskSpec::size(Split split) const {
  switch (split) {
    case Split::kTrain: return train_size;
    case Split::kVal: return val_size;
    case Split::kTest: return test_size;
  }
  return 0;
}

int TaskSpec::input_dim() const {
  switch (kind) {
    case TaskKind::kAdding: return 2;
    case TaskKind::kParity: return 1;
    case TaskKind::kTokenClassify: return 0;
  }
  return 0;
}

int TaskSpec::output_dim() const {
  switch (kind) {
    case TaskKind::kAdding: return 1;
    case TaskKind::kParity: return 2;
    case TaskKind::kTokenClassify: return classes;
  }
  return 0;
}

Dataset gen_task(const TaskSpec& spec, std::uint64_t seed, Split split) {
  spec.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(spec.kind), static_cast<std::uint32_t>(split)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);

  Dataset d;
  d.spec = spec;
  d.split = split;
  d.count = spec.size(split);
  const auto T = static_cast<std::size_t>(spec.length);
  const auto D = static_cast<std::size_t>(spec.input_dim());
  if (spec.tokens()) {
    d.ids.resize(d.count * T);
  } else {
    d.features.resize(d.count * T * D);
  }
  for (std::size_t i = 0; i < d.count; ++i) {
    switch (spec.kind) {
      case TaskKind::kAdding: {
        // Channel 0 carries values in [0, 1), channel 1 marks two positions,
        // one in each half of the sequence.
        double* f = d.features.data() + i * T * D;
        const std::size_t half = T / 2;
        const std::size_t p1 = std::uniform_int_distribution<std::size_t>(0, half - 1)(rng);
        const std::size_t p2 = std::uniform_int_distribution<std::size_t>(half, T - 1)(rng);
        double label = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
          const double v = unit(rng);
          const bool marked = t == p1 || t == p2;
          if (marked) label += v;
          f[t * D] = v + (spec.noise > 0 ? spec.noise * jitter(rng) : 0.0);
          f[t * D + 1] = marked ? 1.0 : 0.0;
        }
        d.targets.push_back(label);
        break;
      }
      case TaskKind::kParity: {
        double* f = d.features.data() + i * T;
        int parity = 0;
        for (std::size_t t = 0; t < T; ++t) {
          const int bit = unit(rng) < 0.5 ? 0 : 1;
          parity ^= bit;
          f[t] = bit + (spec.noise > 0 ? spec.noise * jitter(rng) : 0.0);
        }
        d.labels.push_back(parity);
        break;
      }
      case TaskKind::kTokenClassify: {
        int* ids = d.ids.data() + i * T;
        std::uniform_int_distribution<int> tok(0, spec.vocab - 1);
        for (std::size_t t = 0; t < T; ++t) ids[t] = tok(rng);
        d.labels.push_back(ids[0] % spec.classes);
        break;
      }
    }
  }
  return d;
}

Batch make_batch(const Dataset& data, const std::vector<std::size_t>& order, std::size_t begin,
                 std::size_t count) {
  if (begin + count > data.count) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("batch [{}, {}) exceeds dataset of {}", begin, begin + count, data.count));
  }
  const auto T = static_cast<std::size_t>(data.spec.length);
  const auto D = static_cast<std::size_t>(data.spec.input_dim());
  auto index = [&](std::size_t k) { return order.empty() ? begin + k : order[begin + k]; };
  Batch b;
  if (data.spec.tokens()) {
    b.input.ids.assign(T, std::vector<int>(count));
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = index(k);
      for (std::size_t t = 0; t < T; ++t) b.input.ids[t][k] = data.ids[i * T + t];
    }
  } else {
    b.input.steps.assign(T, Tensor(count, D));
    for (std::size_t k = 0; k < count; ++k) {
      const double* f = data.features.data() + index(k) * T * D;
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < D; ++j) b.input.steps[t](k, j) = f[t * D + j];
      }
    }
  }
  if (data.spec.regression()) {
    b.targets = Tensor(count, 1);
    for (std::size_t k = 0; k < count; ++k) b.targets(k, 0) = data.targets[index(k)];
  } else {
    for (std::size_t k = 0; k < count; ++k) b.labels.push_back(data.labels[index(k)]);
  }
  return b;
}

std::vector<std::vector<double>> sample_steps(const Dataset& data, std::size_t i) {
  if (data.spec.tokens()) {
    throw Error(ErrorCode::kInvalidArgument, "token datasets have no real-valued steps");
  }
  if (i >= data.count) throw Error(ErrorCode::kShapeMismatch, "sample index out of range");
  const auto T = static_cast<std::size_t>(data.spec.length);
  const auto D = static_cast<std::size_t>(data.spec.input_dim());
  std::vector<std::vector<double>> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double* f = data.features.data() + (i * T + t) * D;
    out[t].assign(f, f + D);
  }
  return out;
}

std::string serialize_dataset(const Dataset& data) {
  detail::ByteWriter w;
  w.bytes("NNAQDATA");
  w.u32(1);
  w.str(to_string(data.spec.kind));
  w.str(to_string(data.split));
  w.u32(static_cast<std::uint32_t>(data.spec.length));
  w.u64(data.count);
  w.u64(data.features.size());
  for (double v : data.features) w.f64(v);
  w.u64(data.ids.size());
  for (int v : data.ids) w.i32(v);
  w.u64(data.targets.size());
  for (double v : data.targets) w.f64(v);
  w.u64(data.labels.size());
  for (int v : data.labels) w.i32(v);
  return w.take();
}

}  // namespace nnaqat
