// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/qnn.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "nnaqat/error.hpp"

namespace nnaqat {

const char* to_string(QuantMode mode) {
  switch (mode) {
    case QuantMode::kOff: return "off";
    case QuantMode::kStatic: return "static";
    case QuantMode::kDynamic: return "dynamic";
  }
  return "?";
}

QuantPolicy QuantPolicy::off() { return QuantPolicy{}; }

QuantPolicy QuantPolicy::weights_only() {
  QuantPolicy p;
  p.weights = WeightQuant{};
  return p;
}

QuantPolicy QuantPolicy::full_nna(std::shared_ptr<const TablePair> tables) {
  QuantPolicy p;
  p.weights = WeightQuant{};
  p.input = QuantMode::kDynamic;
  p.hidden = QuantMode::kStatic;
  p.dense_input = QuantMode::kDynamic;
  p.tables = std::move(tables);
  p.cell_state = CellStateMode::kSaturate;
  p.quantize_bias = true;
  p.validate();
  return p;
}

void QuantPolicy::validate() const {
  if (hidden == QuantMode::kDynamic) {
    throw Error(ErrorCode::kInvalidArgument, "hidden states support only static quantization");
  }
  if (tables) {
    if (tables->tanh.kind() != ActivationKind::kTanh ||
        tables->sigmoid.kind() != ActivationKind::kSigmoid) {
      throw Error(ErrorCode::kInvalidArgument, "PWL policy needs a tanh and a sigmoid table");
    }
  }
  if (cell_state == CellStateMode::kSaturate) {
    int exp = 0;
    if (!(cell_bound > 0.0) || std::frexp(cell_bound, &exp) != 0.5) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("cell saturation bound {} must be a power of two", cell_bound));
    }
    if (cell_bound > 16.0) {
      throw Error(ErrorCode::kInvalidArgument, "cell saturation bound must be <= 16 (Q5.26)");
    }
  }
}

void LstmLayerParams::validate() const {
  const std::size_t h = u.cols();
  if (h == 0 || u.rows() != 4 * h || w.rows() != 4 * h || b.rows() != 1 || b.cols() != 4 * h) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("LSTM params w{} u{} b{} are inconsistent (need 4H x D, 4H x H, 1 x 4H)",
                            w.shape_string(), u.shape_string(), b.shape_string()));
  }
}

Network Network::init(const NetworkSpec& spec, std::uint64_t seed) {
  if (spec.layers < 1 || spec.hidden < 1 || spec.input_dim < 1 || spec.output_dim < 1 ||
      spec.vocab < 0) {
    throw Error(ErrorCode::kInvalidArgument, "network spec needs >= 1 layer and positive dims");
  }
  std::mt19937_64 rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(spec.hidden));
  std::uniform_real_distribution<double> uni(-k, k);
  auto random = [&](std::size_t r, std::size_t c, std::uniform_real_distribution<double>& d) {
    Tensor t(r, c);
    for (double& v : t.data()) v = d(rng);
    return t;
  };
  Network net;
  net.spec = spec;
  const auto h = static_cast<std::size_t>(spec.hidden);
  if (spec.vocab > 0) {
    std::uniform_real_distribution<double> emb(-0.5, 0.5);
    net.embedding = random(static_cast<std::size_t>(spec.vocab),
                           static_cast<std::size_t>(spec.input_dim), emb);
  }
  for (int l = 0; l < spec.layers; ++l) {
    const std::size_t d = l == 0 ? static_cast<std::size_t>(spec.input_dim) : h;
    LstmLayerParams p{random(4 * h, d, uni), random(4 * h, h, uni), Tensor(1, 4 * h)};
    net.layers.push_back(std::move(p));
  }
  net.head.w = random(static_cast<std::size_t>(spec.output_dim), h, uni);
  net.head.b = Tensor(1, static_cast<std::size_t>(spec.output_dim));
  return net;
}

std::vector<std::pair<std::string, Tensor*>> Network::parameters() {
  std::vector<std::pair<std::string, Tensor*>> out;
  if (embedding) out.emplace_back("embedding", &*embedding);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out.emplace_back(fmt::format("lstm{}.w", l), &layers[l].w);
    out.emplace_back(fmt::format("lstm{}.u", l), &layers[l].u);
    out.emplace_back(fmt::format("lstm{}.b", l), &layers[l].b);
  }
  out.emplace_back("head.w", &head.w);
  out.emplace_back("head.b", &head.b);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> Network::parameters() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : const_cast<Network*>(this)->parameters()) out.emplace_back(name, t);
  return out;
}

void Network::validate() const {
  if (layers.empty() || static_cast<int>(layers.size()) != spec.layers) {
    throw Error(ErrorCode::kShapeMismatch, "layer count does not match the network spec");
  }
  const auto h = static_cast<std::size_t>(spec.hidden);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].validate();
    const std::size_t d = l == 0 ? static_cast<std::size_t>(spec.input_dim) : h;
    if (layers[l].hidden() != h || layers[l].input_dim() != d) {
      throw Error(ErrorCode::kShapeMismatch, fmt::format("layer {} shape disagrees with spec", l));
    }
  }
  if (head.w.rows() != static_cast<std::size_t>(spec.output_dim) || head.w.cols() != h ||
      head.b.rows() != 1 || head.b.cols() != head.w.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "dense head shape disagrees with spec");
  }
  if ((spec.vocab > 0) != embedding.has_value() ||
      (embedding && (embedding->rows() != static_cast<std::size_t>(spec.vocab) ||
                     embedding->cols() != static_cast<std::size_t>(spec.input_dim)))) {
    throw Error(ErrorCode::kShapeMismatch, "embedding table disagrees with spec");
  }
}

Stack build_stack(const NetworkSpec& spec, const QuantPolicy& policy) {
  if (spec.layers < 1) {
    throw Error(ErrorCode::kInvalidArgument, "a stack needs at least one LSTM layer");
  }
  policy.validate();
  Stack stack{spec, policy, {}};
  for (int l = 0; l < spec.layers; ++l) {
    QuantMode mode = QuantMode::kOff;
    if (policy.input != QuantMode::kOff) mode = l == 0 ? QuantMode::kDynamic : QuantMode::kStatic;
    stack.input_modes.push_back(mode);
  }
  return stack;
}

NetworkVars bind_network(Tape& tape, const Network& net) {
  NetworkVars vars;
  for (const auto& [name, t] : net.parameters()) vars.leaves.push_back(tape.leaf(*t));
  std::size_t i = 0;
  if (net.embedding) vars.embedding = vars.leaves[i++];
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerVars lv{vars.leaves[i], vars.leaves[i + 1], vars.leaves[i + 2]};
    vars.layers.push_back(lv);
    i += 3;
  }
  vars.head_w = vars.leaves[i];
  vars.head_b = vars.leaves[i + 1];
  return vars;
}

namespace {

const QFormat kBiasFormat{32 - kAccumulatorFracBits, kAccumulatorFracBits};

Var maybe_quantize_weights(const Var& w, const QuantPolicy& policy) {
  if (!policy.weights) return w;
  return ad::quantize(w, {policy.weights->format, policy.weights->rounding, std::nullopt,
                          SteConfig::identity()});
}

Var maybe_quantize_bias(const Var& b, const QuantPolicy& policy) {
  if (!policy.quantize_bias) return b;
  return ad::quantize(b, {kBiasFormat, RoundingMode::kNearestTiesAway, std::nullopt,
                          SteConfig::identity()});
}

Var quantize_data(const Var& x, QuantMode mode, const QuantPolicy& policy,
                  std::vector<double>* scales) {
  switch (mode) {
    case QuantMode::kOff:
      if (scales) scales->assign(x.value().rows(), 1.0);
      return x;
    case QuantMode::kStatic:
      return ad::quantize(x, {policy.data_format, RoundingMode::kTowardZero, std::nullopt,
                              policy.ste},
                          scales);
    case QuantMode::kDynamic:
      return ad::quantize(x, {policy.data_format, RoundingMode::kTowardZero, policy.scales,
                              policy.ste},
                          scales);
  }
  return x;
}

std::int64_t to_units(double v, int frac_bits) {
  return static_cast<std::int64_t>(std::ldexp(v, frac_bits));
}

double truncate_to(double v, int frac_bits) {
  return std::ldexp(std::trunc(std::ldexp(v, frac_bits)), -frac_bits) + 0.0;
}

void append_codes(std::vector<std::int64_t>& out, const Tensor& values,
                  const std::vector<double>& row_scales, int frac_bits) {
  for (std::size_t r = 0; r < values.rows(); ++r) {
    for (std::size_t c = 0; c < values.cols(); ++c) {
      out.push_back(to_units(values(r, c) / row_scales[r], frac_bits));
    }
  }
}

void append_scale_exps(std::vector<std::int64_t>& out, const std::vector<double>& row_scales) {
  for (double s : row_scales) out.push_back(static_cast<std::int64_t>(std::ilogb(s)));
}

}  // namespace

CellOutput lstm_cell_step(const LayerVars& params, const Var& x, const Var& h_prev,
                          const Var& c_prev, const QuantPolicy& policy, QuantMode input_mode,
                          CellProbe* probe) {
  const std::size_t hidden = params.u.value().cols();
  const std::size_t batch = x.value().rows();
  if (params.w.value().rows() != 4 * hidden || params.u.value().rows() != 4 * hidden ||
      params.b.value().cols() != 4 * hidden || params.w.value().cols() != x.value().cols() ||
      h_prev.value().cols() != hidden || c_prev.value().cols() != hidden ||
      h_prev.value().rows() != batch || c_prev.value().rows() != batch) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("lstm_cell_step: w{} u{} b{} x{} h{} c{}",
                            params.w.value().shape_string(), params.u.value().shape_string(),
                            params.b.value().shape_string(), x.value().shape_string(),
                            h_prev.value().shape_string(), c_prev.value().shape_string()));
  }
  if (policy.hidden == QuantMode::kDynamic) {
    throw Error(ErrorCode::kInvalidArgument, "hidden states support only static quantization");
  }

  const Var wq = maybe_quantize_weights(params.w, policy);
  const Var uq = maybe_quantize_weights(params.u, policy);
  const Var bq = maybe_quantize_bias(params.b, policy);

  std::vector<double> x_scales;
  std::vector<double> h_scales;
  const Var xq = quantize_data(x, input_mode, policy, &x_scales);
  const Var hq = quantize_data(h_prev, policy.hidden, policy, &h_scales);

  const Var z = ad::add(ad::add(ad::matmul_nt(xq, wq), ad::matmul_nt(hq, uq)), bq);

  const auto gate = [&](std::size_t k) { return ad::slice_cols(z, k * hidden, hidden); };
  const Var zi = gate(0);
  const Var zf = gate(1);
  const Var zg = gate(2);
  const Var zo = gate(3);
  Var i, f, g, o;
  if (policy.pwl()) {
    i = ad::activation(zi, policy.tables->sigmoid);
    f = ad::activation(zf, policy.tables->sigmoid);
    g = ad::activation(zg, policy.tables->tanh);
    o = ad::activation(zo, policy.tables->sigmoid);
  } else {
    i = ad::sigmoid(zi);
    f = ad::sigmoid(zf);
    g = ad::tanh(zg);
    o = ad::sigmoid(zo);
  }

  const Var fc = ad::mul(f, c_prev);
  const Var ig = ad::mul(i, g);
  Var c = ad::add(fc, ig);
  std::size_t saturations = 0;
  if (policy.cell_state == CellStateMode::kSaturate) {
    // Each product is truncated to the Q5.26 grid before the saturating add.
    const Tensor& fcv = fc.value();
    const Tensor& igv = ig.value();
    Tensor fixed(fcv.rows(), fcv.cols());
    for (std::size_t k = 0; k < fixed.size(); ++k) {
      const double v = truncate_to(fcv[k], kCellFracBits) + truncate_to(igv[k], kCellFracBits);
      if (std::abs(v) > policy.cell_bound) ++saturations;
      fixed[k] = std::clamp(v, -policy.cell_bound, policy.cell_bound);
    }
    c = ad::straight_through(c, std::move(fixed));
  }

  const Var tc = policy.pwl() ? ad::activation(c, policy.tables->tanh) : ad::tanh(c);
  const Var h_raw = ad::mul(o, tc);
  std::vector<double> out_scales;
  const Var h = quantize_data(h_raw, policy.hidden, policy, &out_scales);

  if (probe) {
    const int n = policy.data_format.frac_bits();
    if (input_mode != QuantMode::kOff) {
      append_codes(probe->x_codes, xq.value(), x_scales, n);
      append_scale_exps(probe->x_scale_exp, x_scales);
    }
    if (policy.hidden != QuantMode::kOff) {
      append_codes(probe->h_prev_codes, hq.value(), h_scales, n);
      append_codes(probe->h_codes, h.value(), out_scales, n);
    }
    const Tensor& zv = z.value();
    for (double v : zv.data()) probe->z_acc.push_back(to_units(v, kAccumulatorFracBits));
    if (policy.pwl()) {
      const PwlTable& sig = policy.tables->sigmoid;
      const PwlTable& th = policy.tables->tanh;
      for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t k = 0; k < 4 * hidden; ++k) {
          const PwlTable& table = (k / hidden == 2) ? th : sig;
          // Unclamped, so out-of-range pre-activations still compare exactly.
          const auto grid = static_cast<std::int64_t>(
              std::trunc(std::ldexp(zv(r, k), -table.grid_exponent())));
          probe->z_grid.push_back(grid);
          probe->act_codes.push_back(table.code_at(grid));
        }
      }
      for (double v : c.value().data()) probe->tanh_c_codes.push_back(th.code(v));
    }
    for (double v : c.value().data()) probe->cell.push_back(to_units(v, kCellFracBits));
  }
  return CellOutput{h, c, z, saturations};
}

Var dense_forward(const Var& w, const Var& b, const Var& x, const QuantPolicy& policy,
                  DenseProbe* probe) {
  const Tensor& wv = w.value();
  if (wv.cols() != x.value().cols() || b.value().rows() != 1 || b.value().cols() != wv.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("dense_forward: w{} b{} x{}", wv.shape_string(),
                            b.value().shape_string(), x.value().shape_string()));
  }
  const Var wq = maybe_quantize_weights(w, policy);
  const Var bq = maybe_quantize_bias(b, policy);
  std::vector<double> scales;
  const Var xq = quantize_data(x, policy.dense_input, policy, &scales);
  const Var out = ad::add(ad::matmul_nt(xq, wq), bq);
  if (probe) {
    if (policy.dense_input != QuantMode::kOff) {
      append_codes(probe->x_codes, xq.value(), scales, policy.data_format.frac_bits());
      append_scale_exps(probe->x_scale_exp, scales);
    }
    for (double v : out.value().data()) probe->out_acc.push_back(to_units(v, kAccumulatorFracBits));
  }
  return out;
}

Var embedding_lookup(const Var& table, const std::vector<int>& ids, const QuantPolicy& policy) {
  return ad::gather_rows(maybe_quantize_weights(table, policy), ids);
}

std::size_t SequenceInput::batch() const {
  if (!steps.empty()) return steps.front().rows();
  if (!ids.empty()) return ids.front().size();
  return 0;
}

ForwardOutput forward_sequence(const NetworkVars& vars, const SequenceInput& input,
                               const Stack& stack, Tape& tape, SequenceProbe* probe) {
  const std::size_t layers = vars.layers.size();
  if (layers != stack.input_modes.size()) {
    throw Error(ErrorCode::kShapeMismatch, "stack and network disagree on layer count");
  }
  if (!input.ids.empty() && !vars.embedding) {
    throw Error(ErrorCode::kInvalidArgument, "token ids given to a network without embedding");
  }
  if (input.ids.empty() && vars.embedding && input.length() > 0) {
    throw Error(ErrorCode::kInvalidArgument, "network with embedding needs token ids");
  }
  const std::size_t batch = std::max<std::size_t>(input.batch(), 1);
  const std::size_t hidden = vars.layers.front().u.value().cols();

  std::vector<Var> h(layers);
  std::vector<Var> c(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    h[l] = tape.leaf(Tensor(batch, hidden));
    c[l] = tape.leaf(Tensor(batch, hidden));
  }
  if (probe) {
    probe->cells.assign(layers, {});
    probe->head = {};
  }

  // Weights and biases are quantized once per sequence; the per-step calls
  // then see exact grid values and skip their own weight quantization.
  QuantPolicy step_policy = stack.policy;
  step_policy.weights.reset();
  step_policy.quantize_bias = false;
  std::vector<LayerVars> qlayers;
  for (const LayerVars& lv : vars.layers) {
    qlayers.push_back({maybe_quantize_weights(lv.w, stack.policy),
                       maybe_quantize_weights(lv.u, stack.policy),
                       maybe_quantize_bias(lv.b, stack.policy)});
  }
  std::optional<Var> qembedding;
  if (vars.embedding) qembedding = maybe_quantize_weights(*vars.embedding, stack.policy);

  ForwardOutput out;
  for (std::size_t t = 0; t < input.length(); ++t) {
    Var x;
    if (vars.embedding) {
      if (input.ids[t].size() != batch) {
        throw Error(ErrorCode::kShapeMismatch, fmt::format("step {} has a ragged batch", t));
      }
      x = embedding_lookup(*qembedding, input.ids[t], step_policy);
    } else {
      if (input.steps[t].rows() != batch) {
        throw Error(ErrorCode::kShapeMismatch, fmt::format("step {} has a ragged batch", t));
      }
      x = tape.leaf(input.steps[t]);
    }
    for (std::size_t l = 0; l < layers; ++l) {
      CellProbe* cp = nullptr;
      if (probe) {
        probe->cells[l].emplace_back();
        cp = &probe->cells[l].back();
      }
      CellOutput step = lstm_cell_step(qlayers[l], x, h[l], c[l], step_policy,
                                       stack.input_modes[l], cp);
      h[l] = step.h;
      c[l] = step.c;
      out.z.push_back(step.z);
      out.cell_saturations += step.cell_saturations;
      x = step.h;
    }
  }
  out.output = dense_forward(vars.head_w, vars.head_b, h.back(), stack.policy,
                             probe ? &probe->head : nullptr);
  return out;
}

}  // namespace nnaqat
