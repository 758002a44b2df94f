// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nnaqat/activation_tables.hpp"
#include "nnaqat/autodiff.hpp"
#include "nnaqat/fixed_point.hpp"
#include "nnaqat/tensor.hpp"

namespace nnaqat {

enum class QuantMode { kOff, kStatic, kDynamic };
enum class CellStateMode { kExact, kSaturate };

const char* to_string(QuantMode mode);

// MAC products of two Q1.7 operands land on this grid; biases are stored on it
// so pre-activations are exact multiples of 2^-14.
inline constexpr int kAccumulatorFracBits = 14;
// Fixed-point cell state used by CellStateMode::kSaturate (and the engine).
inline constexpr int kCellFracBits = 26;

struct WeightQuant {
  QFormat format = kQ1_7;
  RoundingMode rounding = RoundingMode::kNearestTiesAway;
};

// Where and how tensors are quantized inside the network.
struct QuantPolicy {
  std::optional<WeightQuant> weights;
  // Layer inputs: kOff disables, anything else lets build_stack place dynamic
  // quantization on the first LSTM layer and static on the rest.
  QuantMode input = QuantMode::kOff;
  QuantMode hidden = QuantMode::kOff;       // kStatic or kOff, rounds toward zero
  QuantMode dense_input = QuantMode::kOff;  // kDynamic in the accelerator layout
  QFormat data_format = kQ1_7;
  DynamicScaleSet scales = DynamicScaleSet::standard();
  std::shared_ptr<const TablePair> tables;  // PWL activations when set
  CellStateMode cell_state = CellStateMode::kExact;
  double cell_bound = 16.0;
  bool quantize_bias = false;
  SteConfig ste = SteConfig::clipped_cosine();

  // Full precision everywhere.
  static QuantPolicy off();
  // Q1.7 weights through an identity STE; what stage-I training uses.
  static QuantPolicy weights_only();
  // Accelerator placement: Q1.7 weights, dynamic first-layer and dense inputs,
  // static inputs elsewhere, Q1.7 hidden states, PWL activations, saturating
  // Q5.26 cell state, biases on the accumulator grid.
  static QuantPolicy full_nna(std::shared_ptr<const TablePair> tables);

  bool pwl() const { return tables != nullptr; }
  void validate() const;  // throws ErrorCode::kInvalidArgument
};

struct NetworkSpec {
  int input_dim = 1;
  int hidden = 8;
  int layers = 1;
  int output_dim = 1;
  int vocab = 0;  // > 0: inputs are token ids looked up in an embedding table

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Gate order is (i, f, g, o) everywhere: rows [0, H) of w/u/b feed the input
// gate, [H, 2H) forget, [2H, 3H) cell candidate, [3H, 4H) output.
struct LstmLayerParams {
  Tensor w;  // 4H x D
  Tensor u;  // 4H x H
  Tensor b;  // 1 x 4H

  std::size_t hidden() const { return u.cols(); }
  std::size_t input_dim() const { return w.cols(); }
  void validate() const;
};

struct DenseParams {
  Tensor w;  // out x in
  Tensor b;  // 1 x out
};

struct Network {
  NetworkSpec spec;
  std::optional<Tensor> embedding;  // vocab x input_dim
  std::vector<LstmLayerParams> layers;
  DenseParams head;

  // Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases.
  static Network init(const NetworkSpec& spec, std::uint64_t seed);

  // Stable-ordered view of every trainable tensor with its checkpoint name.
  std::vector<std::pair<std::string, Tensor*>> parameters();
  std::vector<std::pair<std::string, const Tensor*>> parameters() const;
  void validate() const;
};

// Per-layer quantization placement for a stack.
struct Stack {
  NetworkSpec spec;
  QuantPolicy policy;
  std::vector<QuantMode> input_modes;  // one per LSTM layer
};

Stack build_stack(const NetworkSpec& spec, const QuantPolicy& policy);

// Integer views of one cell step, used for golden comparisons. Rows of a
// batch are concatenated.
struct CellProbe {
  std::vector<std::int64_t> x_codes;      // input codes at the chosen scale
  std::vector<std::int64_t> x_scale_exp;  // log2 of the dynamic scale, per row
  std::vector<std::int64_t> h_prev_codes;
  std::vector<std::int64_t> z_acc;   // pre-activations in units of 2^-14
  std::vector<std::int64_t> z_grid;  // pre-activations on the PWL input grid
  std::vector<std::int64_t> act_codes;  // i, f, g, o codebook indices
  std::vector<std::int64_t> cell;       // c_t in units of 2^-26
  std::vector<std::int64_t> tanh_c_codes;
  std::vector<std::int64_t> h_codes;
};

struct DenseProbe {
  std::vector<std::int64_t> x_codes;
  std::vector<std::int64_t> x_scale_exp;
  std::vector<std::int64_t> out_acc;  // outputs in units of 2^-14
};

struct LayerVars {
  Var w;
  Var u;
  Var b;
};

// Tape leaves for every parameter, in Network::parameters() order.
struct NetworkVars {
  std::vector<Var> leaves;
  std::optional<Var> embedding;
  std::vector<LayerVars> layers;
  Var head_w;
  Var head_b;
};

NetworkVars bind_network(Tape& tape, const Network& net);

struct CellOutput {
  Var h;
  Var c;
  Var z;  // the exact tensor fed to the gate activations, B x 4H
  std::size_t cell_saturations = 0;
};

CellOutput lstm_cell_step(const LayerVars& params, const Var& x, const Var& h_prev,
                          const Var& c_prev, const QuantPolicy& policy, QuantMode input_mode,
                          CellProbe* probe = nullptr);

Var dense_forward(const Var& w, const Var& b, const Var& x, const QuantPolicy& policy,
                  DenseProbe* probe = nullptr);

Var embedding_lookup(const Var& table, const std::vector<int>& ids, const QuantPolicy& policy);

// Time-major batch: steps[t] is B x input_dim for real inputs, or ids[t] holds
// B token ids when the network has an embedding.
struct SequenceInput {
  std::vector<Tensor> steps;
  std::vector<std::vector<int>> ids;

  std::size_t length() const { return steps.empty() ? ids.size() : steps.size(); }
  std::size_t batch() const;
};

struct SequenceProbe {
  std::vector<std::vector<CellProbe>> cells;  // [layer][step]
  DenseProbe head;
};

struct ForwardOutput {
  Var output;          // B x output_dim, from the final hidden state of the last layer
  std::vector<Var> z;  // every pre-activation tensor, layer-major
  std::size_t cell_saturations = 0;
};

ForwardOutput forward_sequence(const NetworkVars& vars, const SequenceInput& input,
                               const Stack& stack, Tape& tape, SequenceProbe* probe = nullptr);

}  // namespace nnaqat
