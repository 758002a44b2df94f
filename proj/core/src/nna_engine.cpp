// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/nna_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "nnaqat/error.hpp"

namespace nnaqat {

namespace {

constexpr std::int64_t kInt32Min = std::numeric_limits<std::int32_t>::min();
constexpr std::int64_t kInt32Max = std::numeric_limits<std::int32_t>::max();
constexpr int kDataFracBits = 7;  // Q1.7
constexpr std::int64_t kCellLimit = std::int64_t{16} << kCellFracBits;

std::int64_t checked(std::int64_t v, const char* where) {
  if (v < kInt32Min || v > kInt32Max) {
    throw Error(ErrorCode::kOverflow,
                fmt::format("32-bit accumulator overflow in {} (value {})", where, v));
  }
  return v;
}

// a / 2^shift rounded toward zero (C++ integer division truncates).
std::int64_t shift_toward_zero(std::int64_t v, int shift) {
  if (shift <= 0) return v * (std::int64_t{1} << -shift);
  return v / (std::int64_t{1} << shift);
}

std::int8_t weight_code(double w) {
  const double clipped = std::clamp(w, -1.0, 127.0 / 128.0);
  return static_cast<std::int8_t>(std::round(clipped * 128.0));
}

std::int32_t bias_code(double b) {
  const double lim = 131072.0;
  const double clipped = std::clamp(b, -lim, lim - std::ldexp(1.0, -kAccumulatorFracBits));
  return static_cast<std::int32_t>(std::round(std::ldexp(clipped, kAccumulatorFracBits)));
}

// Dynamic Q1.7 quantization on the CPU side of the data path.
int choose_scale_exponent(std::span<const double> x, const std::vector<int>& exponents) {
  for (int e : exponents) {
    bool fits = true;
    for (double v : x) {
      const double s = std::ldexp(v, -e);
      if (s < -1.0 || s > 127.0 / 128.0) {
        fits = false;
        break;
      }
    }
    if (fits) return e;
  }
  return exponents.back();
}

std::vector<std::int32_t> dynamic_codes(std::span<const double> x, int exponent) {
  std::vector<std::int32_t> codes(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      throw Error(ErrorCode::kInvalidData, "non-finite engine input");
    }
    const double s = std::clamp(std::ldexp(x[j], -exponent), -1.0, 127.0 / 128.0);
    codes[j] = static_cast<std::int32_t>(std::trunc(s * 128.0));
  }
  return codes;
}

std::vector<int> exponents_of(const DynamicScaleSet& scales) {
  std::vector<int> out;
  for (double s : scales.scales()) out.push_back(std::ilogb(s));
  return out;
}

}  // namespace

IntPwl::IntPwl(const PwlTable& table)
    : grid_exponent_(table.grid_exponent()),
      frame_bits_(PwlTable::kCodebookFracBits),
      lo_index_(table.lo_index()),
      hi_index_(table.hi_index()),
      breakpoints_(table.breakpoints()),
      codebook_(table.codebook()) {
  for (std::size_t s = 0; s < table.segment_count(); ++s) {
    frame_bits_ = std::max(frame_bits_, -(table.slopes()[s].exponent + grid_exponent_));
    frame_bits_ = std::max(frame_bits_, -table.intercepts()[s].exponent);
  }
  for (std::size_t s = 0; s < table.segment_count(); ++s) {
    const Dyadic& m = table.slopes()[s];
    const Dyadic& b = table.intercepts()[s];
    slopes_.push_back(m.mantissa * (std::int64_t{1} << (m.exponent + grid_exponent_ + frame_bits_)));
    intercepts_.push_back(b.mantissa * (std::int64_t{1} << (b.exponent + frame_bits_)));
  }
  for (std::int32_t c : codebook_) {
    levels_.push_back(std::int64_t{c} << (frame_bits_ - PwlTable::kCodebookFracBits));
  }
}

int IntPwl::snap(std::int64_t y) const {
  const auto first = levels_.begin();
  const auto last = levels_.end();
  const auto idx = std::lower_bound(first, last, y) - first;
  std::int64_t chosen;
  if (idx == 0) {
    chosen = levels_.front();
  } else if (idx == static_cast<std::ptrdiff_t>(levels_.size())) {
    chosen = levels_.back();
  } else {
    const std::int64_t below = levels_[idx - 1];
    const std::int64_t above = levels_[idx];
    if (y - below < above - y) {
      chosen = below;
    } else if (above - y < y - below) {
      chosen = above;
    } else {
      chosen = y >= 0 ? above : below;
    }
  }
  if (y >= 0) return static_cast<int>(std::upper_bound(first, last, chosen) - first) - 1;
  return static_cast<int>(std::lower_bound(first, last, chosen) - first);
}

int IntPwl::code_at(std::int64_t k) const {
  if (k <= lo_index_) return 0;
  if (k >= hi_index_) return PwlTable::kCodebookSize - 1;
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), k);
  std::ptrdiff_t s = (it - breakpoints_.begin()) - 1;
  s = std::clamp<std::ptrdiff_t>(s, 0, static_cast<std::ptrdiff_t>(slopes_.size()) - 1);
  return snap(slopes_[s] * k + intercepts_[s]);
}

IntLayer IntLayer::lstm(const LstmLayerParams& params, bool dynamic_input,
                        const DynamicScaleSet& scales, std::shared_ptr<const IntTables> tables) {
  params.validate();
  if (!tables) throw Error(ErrorCode::kInvalidArgument, "LSTM layer needs activation tables");
  IntLayer layer;
  layer.kind = Kind::kLstm;
  layer.input_dim = params.input_dim();
  layer.units = params.hidden();
  for (double v : params.w.data()) layer.w.push_back(weight_code(v));
  for (double v : params.u.data()) layer.u.push_back(weight_code(v));
  for (double v : params.b.data()) layer.bias.push_back(bias_code(v));
  layer.dynamic_input = dynamic_input;
  layer.scale_exponents = exponents_of(scales);
  layer.tables = std::move(tables);
  return layer;
}

IntLayer IntLayer::dense(const DenseParams& params, const DynamicScaleSet& scales) {
  if (params.b.rows() != 1 || params.b.cols() != params.w.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "dense bias must be 1 x outputs");
  }
  IntLayer layer;
  layer.kind = Kind::kDense;
  layer.input_dim = params.w.cols();
  layer.units = params.w.rows();
  for (double v : params.w.data()) layer.w.push_back(weight_code(v));
  for (double v : params.b.data()) layer.bias.push_back(bias_code(v));
  layer.dynamic_input = true;
  layer.scale_exponents = exponents_of(scales);
  return layer;
}

void IntLayer::validate() const {
  const std::size_t rows = kind == Kind::kLstm ? 4 * units : units;
  bool ok = w.size() == rows * input_dim && bias.size() == rows && !scale_exponents.empty();
  if (kind == Kind::kLstm) ok = ok && u.size() == rows * units && tables != nullptr;
  if (!ok) throw Error(ErrorCode::kShapeMismatch, "engine layer buffers are inconsistent");
}

EngineState EngineState::zeros(std::size_t hidden) {
  return EngineState{std::vector<std::int8_t>(hidden, 0), std::vector<std::int32_t>(hidden, 0)};
}

EngineState engine_lstm_step(const IntLayer& layer, const LayerInput& input,
                             const EngineState& state, CellProbe* trace,
                             EngineCounters* counters) {
  if (layer.kind != IntLayer::Kind::kLstm) {
    throw Error(ErrorCode::kInvalidArgument, "engine_lstm_step needs an LSTM layer");
  }
  layer.validate();
  const std::size_t hidden = layer.units;
  const std::size_t d = layer.input_dim;
  if (state.h.size() != hidden || state.c.size() != hidden) {
    throw Error(ErrorCode::kShapeMismatch, "engine state size differs from the layer");
  }

  std::vector<std::int32_t> x;
  int exponent = 0;
  if (layer.dynamic_input) {
    if (input.reals.size() != d) {
      throw Error(ErrorCode::kShapeMismatch,
                  fmt::format("layer expects {} inputs, got {}", d, input.reals.size()));
    }
    exponent = choose_scale_exponent(input.reals, layer.scale_exponents);
    x = dynamic_codes(input.reals, exponent);
  } else {
    if (input.codes.size() != d) {
      throw Error(ErrorCode::kShapeMismatch,
                  fmt::format("layer expects {} codes, got {}", d, input.codes.size()));
    }
    x.assign(input.codes.begin(), input.codes.end());
  }

  const IntPwl& sig = layer.tables->sigmoid;
  const IntPwl& th = layer.tables->tanh;
  const int grid_shift = kAccumulatorFracBits + sig.grid_exponent();

  std::vector<std::int32_t> z(4 * hidden);
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    std::int64_t ax = 0;
    const std::int8_t* wr = layer.w.data() + r * d;
    for (std::size_t j = 0; j < d; ++j) ax = checked(ax + std::int64_t{wr[j]} * x[j], "input MAC");
    ax = checked(ax * (std::int64_t{1} << exponent), "dynamic rescale");
    std::int64_t acc = ax;
    const std::int8_t* ur = layer.u.data() + r * hidden;
    for (std::size_t j = 0; j < hidden; ++j) {
      acc = checked(acc + std::int64_t{ur[j]} * state.h[j], "recurrent MAC");
    }
    z[r] = static_cast<std::int32_t>(checked(acc + layer.bias[r], "bias add"));
  }

  std::vector<std::int64_t> grid(4 * hidden);
  std::vector<int> codes(4 * hidden);
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    grid[r] = shift_toward_zero(z[r], grid_shift);
    codes[r] = (r / hidden == 2) ? th.code_at(grid[r]) : sig.code_at(grid[r]);
  }

  EngineState next = EngineState::zeros(hidden);
  std::vector<int> tanh_codes(hidden);
  const int cell_grid_shift = kCellFracBits + th.grid_exponent();
  for (std::size_t j = 0; j < hidden; ++j) {
    const std::int64_t i_l = sig.level(codes[j]);
    const std::int64_t f_l = sig.level(codes[hidden + j]);
    const std::int64_t g_l = th.level(codes[2 * hidden + j]);
    const std::int64_t o_l = sig.level(codes[3 * hidden + j]);
    // f (2^-15) * c (2^-26) -> 2^-26; i (2^-15) * g (2^-15) -> 2^-26.
    const std::int64_t fc = shift_toward_zero(f_l * state.c[j], PwlTable::kCodebookFracBits);
    const std::int64_t ig =
        shift_toward_zero(i_l * g_l, 2 * PwlTable::kCodebookFracBits - kCellFracBits);
    std::int64_t c = fc + ig;
    if (c > kCellLimit || c < -kCellLimit) {
      if (counters) ++counters->cell_saturations;
      c = std::clamp(c, -kCellLimit, kCellLimit);
    }
    next.c[j] = static_cast<std::int32_t>(c);
    tanh_codes[j] = th.code_at(shift_toward_zero(c, cell_grid_shift));
    const std::int64_t prod = o_l * th.level(tanh_codes[j]);  // 2^-30
    const std::int64_t h =
        shift_toward_zero(prod, 2 * PwlTable::kCodebookFracBits - kDataFracBits);
    next.h[j] = static_cast<std::int8_t>(std::clamp<std::int64_t>(h, -128, 127));
  }

  if (trace) {
    trace->x_codes.insert(trace->x_codes.end(), x.begin(), x.end());
    trace->x_scale_exp.push_back(exponent);
    trace->h_prev_codes.insert(trace->h_prev_codes.end(), state.h.begin(), state.h.end());
    trace->z_acc.insert(trace->z_acc.end(), z.begin(), z.end());
    trace->z_grid.insert(trace->z_grid.end(), grid.begin(), grid.end());
    trace->act_codes.insert(trace->act_codes.end(), codes.begin(), codes.end());
    trace->cell.insert(trace->cell.end(), next.c.begin(), next.c.end());
    trace->tanh_c_codes.insert(trace->tanh_c_codes.end(), tanh_codes.begin(), tanh_codes.end());
    trace->h_codes.insert(trace->h_codes.end(), next.h.begin(), next.h.end());
  }
  return next;
}

std::vector<std::int32_t> engine_dense(const IntLayer& layer, std::span<const double> x,
                                       DenseProbe* trace) {
  if (layer.kind != IntLayer::Kind::kDense) {
    throw Error(ErrorCode::kInvalidArgument, "engine_dense needs a dense layer");
  }
  layer.validate();
  if (x.size() != layer.input_dim) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("dense layer expects {} inputs, got {}", layer.input_dim, x.size()));
  }
  const int exponent = choose_scale_exponent(x, layer.scale_exponents);
  const std::vector<std::int32_t> codes = dynamic_codes(x, exponent);
  std::vector<std::int32_t> out(layer.units);
  for (std::size_t r = 0; r < layer.units; ++r) {
    std::int64_t acc = 0;
    const std::int8_t* wr = layer.w.data() + r * layer.input_dim;
    for (std::size_t j = 0; j < layer.input_dim; ++j) {
      acc = checked(acc + std::int64_t{wr[j]} * codes[j], "dense MAC");
    }
    acc = checked(acc * (std::int64_t{1} << exponent), "dynamic rescale");
    out[r] = static_cast<std::int32_t>(checked(acc + layer.bias[r], "bias add"));
  }
  if (trace) {
    trace->x_codes.insert(trace->x_codes.end(), codes.begin(), codes.end());
    trace->x_scale_exp.push_back(exponent);
    trace->out_acc.insert(trace->out_acc.end(), out.begin(), out.end());
  }
  return out;
}

EngineNetwork EngineNetwork::from(const Network& net, const TablePair& tables,
                                  const DynamicScaleSet& scales) {
  net.validate();
  if (net.embedding) {
    throw Error(ErrorCode::kInvalidArgument,
                "the engine runs real-valued inputs; look up embeddings on the CPU first");
  }
  auto int_tables = std::make_shared<const IntTables>(tables);
  EngineNetwork out;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    out.lstm.push_back(IntLayer::lstm(net.layers[l], l == 0, scales, int_tables));
  }
  out.head = IntLayer::dense(net.head, scales);
  return out;
}

EngineRun engine_run(const EngineNetwork& net, const std::vector<std::vector<double>>& inputs) {
  EngineRun run;
  run.probe.cells.assign(net.lstm.size(), {});
  if (inputs.empty()) return run;
  std::vector<EngineState> states;
  for (const IntLayer& l : net.lstm) states.push_back(EngineState::zeros(l.units));
  for (const auto& step : inputs) {
    for (std::size_t l = 0; l < net.lstm.size(); ++l) {
      LayerInput in;
      if (l == 0) {
        in.reals = step;
      } else {
        in.codes = states[l - 1].h;
      }
      run.probe.cells[l].emplace_back();
      states[l] = engine_lstm_step(net.lstm[l], in, states[l], &run.probe.cells[l].back(),
                                   &run.counters);
    }
  }
  std::vector<double> h;
  for (std::int8_t code : states.back().h) h.push_back(std::ldexp(code, -kDataFracBits));
  run.output = engine_dense(net.head, h, &run.probe.head);
  return run;
}

}  // namespace nnaqat
