// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "nnaqat/activation_tables.hpp"
#include "nnaqat/fixed_point.hpp"
#include "nnaqat/qnn.hpp"

namespace nnaqat {

// Integer evaluation frame of a PwlTable: slopes, intercepts and levels are
// rescaled onto one common 2^-frame_bits grid so a lookup is an integer
// multiply-add followed by a nearest-level search.
class IntPwl {
 public:
  explicit IntPwl(const PwlTable& table);

  int grid_exponent() const { return grid_exponent_; }
  int code_at(std::int64_t k) const;
  std::int32_t level(int code) const { return codebook_[static_cast<std::size_t>(code)]; }

 private:
  int snap(std::int64_t y) const;

  int grid_exponent_;
  int frame_bits_;
  std::int64_t lo_index_;
  std::int64_t hi_index_;
  std::vector<std::int64_t> breakpoints_;
  std::vector<std::int64_t> slopes_;      // units of 2^-frame_bits per grid index
  std::vector<std::int64_t> intercepts_;  // units of 2^-frame_bits
  std::vector<std::int64_t> levels_;      // units of 2^-frame_bits
  std::vector<std::int32_t> codebook_;    // units of 2^-15
};

struct IntTables {
  IntPwl tanh;
  IntPwl sigmoid;

  explicit IntTables(const TablePair& tables) : tanh(tables.tanh), sigmoid(tables.sigmoid) {}
};

// One accelerator layer: 8-bit Q1.7 weight codes and 32-bit biases on the
// 2^-14 accumulator grid.
struct IntLayer {
  enum class Kind { kLstm, kDense };

  Kind kind = Kind::kLstm;
  std::size_t input_dim = 0;
  std::size_t units = 0;  // H for LSTM, outputs for dense
  std::vector<std::int8_t> w;  // rows x input_dim, rows = 4H or outputs
  std::vector<std::int8_t> u;  // 4H x H (LSTM only)
  std::vector<std::int32_t> bias;
  bool dynamic_input = false;
  std::vector<int> scale_exponents;  // allowed dynamic scales as powers of two
  std::shared_ptr<const IntTables> tables;

  static IntLayer lstm(const LstmLayerParams& params, bool dynamic_input,
                       const DynamicScaleSet& scales, std::shared_ptr<const IntTables> tables);
  static IntLayer dense(const DenseParams& params, const DynamicScaleSet& scales);
  void validate() const;
};

struct EngineState {
  std::vector<std::int8_t> h;   // Q1.7 codes
  std::vector<std::int32_t> c;  // Q5.26, saturating at +-16

  static EngineState zeros(std::size_t hidden);
};

// Activation input for a layer: raw reals for a dynamically quantized layer
// (the CPU-side data path), Q1.7 codes otherwise.
struct LayerInput {
  std::span<const double> reals;
  std::span<const std::int8_t> codes;
};

struct EngineCounters {
  std::size_t cell_saturations = 0;
};

// One LSTM step on integer codes. Appends every probe point to trace when
// given. Throws ErrorCode::kOverflow if any partial sum leaves int32.
EngineState engine_lstm_step(const IntLayer& layer, const LayerInput& input,
                             const EngineState& state, CellProbe* trace = nullptr,
                             EngineCounters* counters = nullptr);

// Dense layer with dynamic input quantization; returns outputs in units of
// 2^-14 (the dynamic scale is folded back in).
std::vector<std::int32_t> engine_dense(const IntLayer& layer, std::span<const double> x,
                                       DenseProbe* trace = nullptr);

// Whole network on the engine: LSTM stack then the dense head on the final
// hidden state. inputs[t] is one time step of raw reals.
struct EngineNetwork {
  std::vector<IntLayer> lstm;
  IntLayer head;

  static EngineNetwork from(const Network& net, const TablePair& tables,
                            const DynamicScaleSet& scales);
};

struct EngineRun {
  SequenceProbe probe;
  std::vector<std::int32_t> output;  // empty for an empty sequence
  EngineCounters counters;
};

EngineRun engine_run(const EngineNetwork& net, const std::vector<std::vector<double>>& inputs);

}  // namespace nnaqat
