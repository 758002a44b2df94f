// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "nnaqat/activation_tables.hpp"
#include "nnaqat/fixed_point.hpp"
#include "nnaqat/tensor.hpp"

namespace nnaqat {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Tensor& grad() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so the node list
// is already topologically sorted; backward walks it once in reverse.
// Single-writer: one thread builds and differentiates a given tape.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Var leaf(Tensor value);
  Var record(Tensor value, BackwardFn backward);

  // Zeroes every gradient, seeds d(loss)/d(loss) = 1 and runs the chain rule.
  // The loss must be 1 x 1.
  void backward(const Var& loss);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }
  Tensor& grad_mut(std::size_t id) { return nodes_[id].grad; }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

// Surrogate gradient of a quantization node.
struct SteConfig {
  enum class Kind { kClippedCosine, kIdentity };
  enum class CosineUnit {
    kPerBin,    // u = x / bin_width: one cosine period per quantization bin
    kRawInput,  // u = x, the literal reading of the printed formula
  };

  Kind kind = Kind::kClippedCosine;
  double frequency = 1.0;
  CosineUnit unit = CosineUnit::kPerBin;

  static SteConfig clipped_cosine(double frequency = 1.0) {
    return {Kind::kClippedCosine, frequency, CosineUnit::kPerBin};
  }
  static SteConfig identity() { return {Kind::kIdentity, 1.0, CosineUnit::kPerBin}; }
};

// clip(cos(2*pi*v), 0, 1) with exact 1 at integers and exact 0 for
// |v - round(v)| >= 1/4.
double clipped_cosine(double v);

// Local backward factor of a quantization node for one element.
double ste_factor(const SteConfig& ste, double x, double bin_width);

struct QuantizeSpec {
  QFormat format = kQ1_7;
  RoundingMode mode = RoundingMode::kTowardZero;
  std::optional<DynamicScaleSet> dynamic;  // per-row dynamic scaling when set
  SteConfig ste = SteConfig::clipped_cosine();
};

namespace ad {

Var matmul(const Var& a, const Var& b);     // a * b
Var matmul_nt(const Var& a, const Var& b);  // a * b^T
Var add(const Var& a, const Var& b);        // same shape, or b a 1 x n row broadcast over a
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var square(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(const Var& a, std::size_t start, std::size_t count);
// Row r of the result is row ids[r] of a.
Var gather_rows(const Var& a, const std::vector<int>& ids);
Var sum(const Var& a);
Var mean(const Var& a);
// Mean over rows of -log softmax(logits)[label].
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels);

// Bit-exact forward of quantize_static / quantize_dynamic (dynamic scales
// chosen per row); backward multiplies by ste_factor. The chosen scale of each
// row is written to row_scales when given. Scale selection is treated as a
// constant of the forward pass.
Var quantize(const Var& x, const QuantizeSpec& spec, std::vector<double>* row_scales = nullptr);

// Forward is table.eval elementwise; backward uses the derivative of the true
// function at the unquantized input.
Var activation(const Var& x, const PwlTable& table);

// Forward is an arbitrary elementwise map already computed by the caller;
// backward passes the gradient through unchanged.
Var straight_through(const Var& x, Tensor forward_value);

}  // namespace ad
}  // namespace nnaqat
