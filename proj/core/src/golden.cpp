// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/golden.hpp"

#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "binary_io.hpp"
#include "nnaqat/checkpoint.hpp"
#include "nnaqat/error.hpp"
#include "nnaqat/nna_engine.hpp"

namespace nnaqat {

namespace {

constexpr std::string_view kTraceMagic = "NNAQGOLD";
constexpr std::string_view kSeqMagic = "NNAQSEQ1";
constexpr std::uint32_t kVersion = 1;

std::vector<std::int32_t> narrow(const std::vector<std::int64_t>& v) {
  std::vector<std::int32_t> out;
  out.reserve(v.size());
  for (std::int64_t x : v) {
    if (x < INT32_MIN || x > INT32_MAX) {
      throw Error(ErrorCode::kOverflow, "probe value does not fit a 32-bit record");
    }
    out.push_back(static_cast<std::int32_t>(x));
  }
  return out;
}

struct Prepared {
  Checkpoint ckpt;
  std::shared_ptr<const TablePair> tables;
  std::vector<std::vector<double>> inputs;
  GoldenHeader header;
};

Prepared prepare(std::string_view checkpoint_bytes, std::string_view tanh_table_text,
                 std::string_view input_bytes) {
  Prepared p;
  p.ckpt = parse_checkpoint(checkpoint_bytes);
  PwlTable tanh = parse_table(tanh_table_text);
  if (tanh.kind() != ActivationKind::kTanh) {
    throw Error(ErrorCode::kInvalidArgument, "golden runs take a tanh table file");
  }
  PwlTable sigmoid = derive_sigmoid_table(tanh);
  p.header.network_hash = detail::fnv1a(checkpoint_bytes);
  p.header.tanh_hash = detail::fnv1a(tanh_table_text);
  p.header.sigmoid_hash = detail::fnv1a(serialize_table(sigmoid));
  p.header.input_hash = detail::fnv1a(input_bytes);
  p.tables = std::make_shared<const TablePair>(TablePair{std::move(tanh), std::move(sigmoid)});
  p.inputs = parse_sequence(input_bytes);
  const NetworkSpec& spec = p.ckpt.network.spec;
  for (const auto& step : p.inputs) {
    if (step.size() != static_cast<std::size_t>(spec.input_dim)) {
      throw Error(ErrorCode::kShapeMismatch,
                  fmt::format("input dim {} does not match network input dim {}", step.size(),
                              spec.input_dim));
    }
  }
  p.header.layers = static_cast<std::uint32_t>(spec.layers);
  p.header.hidden = static_cast<std::uint32_t>(spec.hidden);
  p.header.steps = static_cast<std::uint32_t>(p.inputs.size());
  return p;
}

}  // namespace

const char* probe_name(Probe probe) {
  switch (probe) {
    case Probe::kInputCodes: return "input_codes";
    case Probe::kInputScaleExp: return "input_scale_exp";
    case Probe::kHiddenPrevCodes: return "hidden_prev_codes";
    case Probe::kPreactAcc: return "preact_acc";
    case Probe::kPreactGrid: return "preact_grid";
    case Probe::kGateCodes: return "gate_codes";
    case Probe::kCellState: return "cell_state";
    case Probe::kTanhCellCodes: return "tanh_cell_codes";
    case Probe::kHiddenCodes: return "hidden_codes";
    case Probe::kDenseInputCodes: return "dense_input_codes";
    case Probe::kDenseInputScaleExp: return "dense_input_scale_exp";
    case Probe::kDenseOutputAcc: return "dense_output_acc";
  }
  return "unknown";
}

std::string serialize_trace(const GoldenTrace& trace) {
  detail::ByteWriter w;
  w.bytes(kTraceMagic);
  w.u32(kVersion);
  w.u64(trace.header.network_hash);
  w.u64(trace.header.tanh_hash);
  w.u64(trace.header.sigmoid_hash);
  w.u64(trace.header.input_hash);
  w.u32(trace.header.layers);
  w.u32(trace.header.hidden);
  w.u32(trace.header.steps);
  w.u32(static_cast<std::uint32_t>(trace.records.size()));
  for (const GoldenRecord& rec : trace.records) {
    w.u32(static_cast<std::uint32_t>(rec.probe));
    w.u32(rec.layer);
    w.u32(rec.step);
    w.u32(static_cast<std::uint32_t>(rec.values.size()));
    for (std::int32_t v : rec.values) w.i32(v);
  }
  return w.take();
}

std::size_t record_offset(const GoldenTrace& trace, std::size_t index) {
  std::size_t off = kTraceMagic.size() + 4 + 4 * 8 + 4 * 4;
  for (std::size_t i = 0; i < index && i < trace.records.size(); ++i) {
    off += 16 + 4 * trace.records[i].values.size();
  }
  return off;
}

GoldenTrace parse_trace(std::string_view bytes) {
  detail::ByteReader r(bytes, "golden trace");
  if (r.bytes(kTraceMagic.size()) != kTraceMagic) r.fail("bad magic");
  if (const std::uint32_t v = r.u32(); v != kVersion) {
    r.fail(fmt::format("unsupported version {}", v));
  }
  GoldenTrace t;
  t.header.network_hash = r.u64();
  t.header.tanh_hash = r.u64();
  t.header.sigmoid_hash = r.u64();
  t.header.input_hash = r.u64();
  t.header.layers = r.u32();
  t.header.hidden = r.u32();
  t.header.steps = r.u32();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    GoldenRecord rec;
    const std::uint32_t probe = r.u32();
    if (probe < 1 || probe > 12) r.fail(fmt::format("unknown probe id {}", probe));
    rec.probe = static_cast<Probe>(probe);
    rec.layer = r.u32();
    rec.step = r.u32();
    const std::uint32_t count = r.u32();
    if (static_cast<std::size_t>(count) * 4 > r.remaining()) r.fail("truncated record");
    rec.values.resize(count);
    for (std::int32_t& v : rec.values) v = r.i32();
    t.records.push_back(std::move(rec));
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return t;
}

std::string serialize_sequence(const std::vector<std::vector<double>>& steps, std::size_t dim) {
  detail::ByteWriter w;
  w.bytes(kSeqMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(steps.size()));
  w.u32(static_cast<std::uint32_t>(dim));
  for (const auto& s : steps) {
    if (s.size() != dim) throw Error(ErrorCode::kShapeMismatch, "ragged input sequence");
    for (double v : s) w.f64(v);
  }
  return w.take();
}

std::vector<std::vector<double>> parse_sequence(std::string_view bytes) {
  detail::ByteReader r(bytes, "input sequence");
  if (r.bytes(kSeqMagic.size()) != kSeqMagic) r.fail("bad magic");
  if (const std::uint32_t v = r.u32(); v != kVersion) {
    r.fail(fmt::format("unsupported version {}", v));
  }
  const std::uint32_t steps = r.u32();
  const std::uint32_t dim = r.u32();
  if (dim == 0 || static_cast<std::uint64_t>(steps) * dim * 8 != r.remaining()) {
    r.fail("payload size disagrees with steps x dim");
  }
  std::vector<std::vector<double>> out(steps, std::vector<double>(dim));
  for (auto& s : out) {
    for (double& v : s) {
      v = r.f64();
      if (!std::isfinite(v)) r.fail("non-finite input value");
    }
  }
  return out;
}

std::vector<GoldenRecord> records_from_probe(const SequenceProbe& probe) {
  std::vector<GoldenRecord> out;
  const std::size_t layers = probe.cells.size();
  const std::size_t steps = layers == 0 ? 0 : probe.cells.front().size();
  if (steps == 0) return out;
  auto add = [&](Probe p, std::size_t layer, std::size_t step,
                 const std::vector<std::int64_t>& v) {
    out.push_back(GoldenRecord{p, static_cast<std::uint32_t>(layer),
                               static_cast<std::uint32_t>(step), narrow(v)});
  };
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t l = 0; l < layers; ++l) {
      const CellProbe& c = probe.cells[l][t];
      add(Probe::kInputCodes, l, t, c.x_codes);
      add(Probe::kInputScaleExp, l, t, c.x_scale_exp);
      add(Probe::kHiddenPrevCodes, l, t, c.h_prev_codes);
      add(Probe::kPreactAcc, l, t, c.z_acc);
      add(Probe::kPreactGrid, l, t, c.z_grid);
      add(Probe::kGateCodes, l, t, c.act_codes);
      add(Probe::kCellState, l, t, c.cell);
      add(Probe::kTanhCellCodes, l, t, c.tanh_c_codes);
      add(Probe::kHiddenCodes, l, t, c.h_codes);
    }
  }
  add(Probe::kDenseInputCodes, layers, steps - 1, probe.head.x_codes);
  add(Probe::kDenseInputScaleExp, layers, steps - 1, probe.head.x_scale_exp);
  add(Probe::kDenseOutputAcc, layers, steps - 1, probe.head.out_acc);
  return out;
}

GoldenTrace golden_run(std::string_view checkpoint_bytes, std::string_view tanh_table_text,
                       std::string_view input_bytes) {
  Prepared p = prepare(checkpoint_bytes, tanh_table_text, input_bytes);
  const EngineNetwork engine =
      EngineNetwork::from(p.ckpt.network, *p.tables, DynamicScaleSet::standard());
  const EngineRun run = engine_run(engine, p.inputs);
  return GoldenTrace{p.header, records_from_probe(run.probe)};
}

GoldenTrace emulate_trace(std::string_view checkpoint_bytes, std::string_view tanh_table_text,
                          std::string_view input_bytes) {
  Prepared p = prepare(checkpoint_bytes, tanh_table_text, input_bytes);
  if (p.ckpt.network.embedding) {
    throw Error(ErrorCode::kInvalidArgument, "golden traces cover real-input networks only");
  }
  if (p.inputs.empty()) return GoldenTrace{p.header, {}};
  Tape tape;
  const NetworkVars vars = bind_network(tape, p.ckpt.network);
  const Stack stack = build_stack(p.ckpt.network.spec, QuantPolicy::full_nna(p.tables));
  SequenceInput input;
  for (const auto& s : p.inputs) input.steps.push_back(Tensor::row(s));
  SequenceProbe probe;
  forward_sequence(vars, input, stack, tape, &probe);
  return GoldenTrace{p.header, records_from_probe(probe)};
}

std::string Divergence::describe() const {
  if (where == "header") {
    return fmt::format("header mismatch ({}): expected {}, got {}", index == 0 ? "hashes" : "shape",
                       expected, actual);
  }
  return fmt::format("first divergence at record {} (probe {}, layer {}, step {}, index {}): "
                     "expected {}, got {}",
                     record, where, layer, step, index, expected, actual);
}

std::optional<Divergence> compare_traces(const GoldenTrace& expected, const GoldenTrace& actual) {
  const GoldenHeader& he = expected.header;
  const GoldenHeader& ha = actual.header;
  const std::uint64_t hashes_e[] = {he.network_hash, he.tanh_hash, he.sigmoid_hash, he.input_hash};
  const std::uint64_t hashes_a[] = {ha.network_hash, ha.tanh_hash, ha.sigmoid_hash, ha.input_hash};
  for (int i = 0; i < 4; ++i) {
    if (hashes_e[i] != hashes_a[i]) {
      return Divergence{"header", 0, 0, 0, 0, static_cast<std::int64_t>(hashes_e[i]),
                        static_cast<std::int64_t>(hashes_a[i])};
    }
  }
  if (he.layers != ha.layers || he.hidden != ha.hidden || he.steps != ha.steps) {
    return Divergence{"header", 0, 0, 0, 1, he.steps, ha.steps};
  }
  const std::size_t n = std::min(expected.records.size(), actual.records.size());
  for (std::size_t i = 0; i < n; ++i) {
    const GoldenRecord& e = expected.records[i];
    const GoldenRecord& a = actual.records[i];
    if (e.probe != a.probe || e.layer != a.layer || e.step != a.step) {
      return Divergence{probe_name(e.probe), i, e.layer, e.step, 0,
                        static_cast<std::int64_t>(e.probe), static_cast<std::int64_t>(a.probe)};
    }
    const std::size_t m = std::min(e.values.size(), a.values.size());
    for (std::size_t k = 0; k < m; ++k) {
      if (e.values[k] != a.values[k]) {
        return Divergence{probe_name(e.probe), i, e.layer, e.step, k, e.values[k], a.values[k]};
      }
    }
    if (e.values.size() != a.values.size()) {
      return Divergence{probe_name(e.probe), i, e.layer, e.step, m,
                        static_cast<std::int64_t>(e.values.size()),
                        static_cast<std::int64_t>(a.values.size())};
    }
  }
  if (expected.records.size() != actual.records.size()) {
    const std::size_t i = n;
    const GoldenRecord& r = i < expected.records.size() ? expected.records[i] : actual.records[i];
    return Divergence{probe_name(r.probe), i, r.layer, r.step, 0,
                      static_cast<std::int64_t>(expected.records.size()),
                      static_cast<std::int64_t>(actual.records.size())};
  }
  return std::nullopt;
}

}  // namespace nnaqat
