// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nnaqat/qnn.hpp"

namespace nnaqat {

// Probe points recorded per LSTM layer and step (1-9) and once for the
// dense head (10-12).
enum class Probe : std::uint32_t {
  kInputCodes = 1,
  kInputScaleExp = 2,
  kHiddenPrevCodes = 3,
  kPreactAcc = 4,
  kPreactGrid = 5,
  kGateCodes = 6,
  kCellState = 7,
  kTanhCellCodes = 8,
  kHiddenCodes = 9,
  kDenseInputCodes = 10,
  kDenseInputScaleExp = 11,
  kDenseOutputAcc = 12,
};

const char* probe_name(Probe probe);

struct GoldenRecord {
  Probe probe = Probe::kInputCodes;
  std::uint32_t layer = 0;
  std::uint32_t step = 0;
  std::vector<std::int32_t> values;

  friend bool operator==(const GoldenRecord&, const GoldenRecord&) = default;
};

struct GoldenHeader {
  std::uint64_t network_hash = 0;
  std::uint64_t tanh_hash = 0;
  std::uint64_t sigmoid_hash = 0;
  std::uint64_t input_hash = 0;
  std::uint32_t layers = 0;
  std::uint32_t hidden = 0;
  std::uint32_t steps = 0;

  friend bool operator==(const GoldenHeader&, const GoldenHeader&) = default;
};

struct GoldenTrace {
  GoldenHeader header;
  std::vector<GoldenRecord> records;

  friend bool operator==(const GoldenTrace&, const GoldenTrace&) = default;
};

// Byte layout (little-endian), see docs/formats.md:
//   "NNAQGOLD" u32 version
//   u64 network_hash u64 tanh_hash u64 sigmoid_hash u64 input_hash
//   u32 layers u32 hidden u32 steps u32 n_records
//   { u32 probe, u32 layer, u32 step, u32 count, i32 * count } * n_records
std::string serialize_trace(const GoldenTrace& trace);
GoldenTrace parse_trace(std::string_view bytes);

// Byte offset of record `index` inside serialize_trace output.
std::size_t record_offset(const GoldenTrace& trace, std::size_t index);

// Input sequence file: "NNAQSEQ1" u32 version u32 steps u32 dim f64 * steps*dim.
std::string serialize_sequence(const std::vector<std::vector<double>>& steps, std::size_t dim);
std::vector<std::vector<double>> parse_sequence(std::string_view bytes);

// Flattens probes into records: per step, per layer, probes 1-9; then the
// dense probes with layer = layer count and step = last step. An empty
// sequence produces no records.
std::vector<GoldenRecord> records_from_probe(const SequenceProbe& probe);

// Runs the integer engine over the given files (checkpoint bytes, tanh table
// text, sequence bytes). The sigmoid table is derived from the tanh table.
GoldenTrace golden_run(std::string_view checkpoint_bytes, std::string_view tanh_table_text,
                       std::string_view input_bytes);

// Same inputs replayed through the float emulator with the full accelerator
// policy.
GoldenTrace emulate_trace(std::string_view checkpoint_bytes, std::string_view tanh_table_text,
                          std::string_view input_bytes);

struct Divergence {
  std::string where;  // "header" or the probe name
  std::size_t record = 0;
  std::uint32_t layer = 0;
  std::uint32_t step = 0;
  std::size_t index = 0;
  std::int64_t expected = 0;
  std::int64_t actual = 0;

  std::string describe() const;
};

// First point where actual differs from expected, if any.
std::optional<Divergence> compare_traces(const GoldenTrace& expected, const GoldenTrace& actual);

}  // namespace nnaqat
