// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "nnaqat/error.hpp"

namespace nnaqat {

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kInvalidArgument, "failed writing " + path);
}

}  // namespace detail

namespace {

constexpr std::string_view kMagic = "NNAQCKPT";
constexpr std::uint32_t kVersion = 1;

bool bits_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

bool is_bias(const std::string& name) { return name.size() >= 2 && name.ends_with(".b"); }

int spec_field(const std::map<std::string, std::string>& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) {
    throw Error(ErrorCode::kParse, "checkpoint metadata lacks '" + key + "'");
  }
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "checkpoint metadata '" + key + "' is not an integer");
  }
}

}  // namespace

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  if (a.meta != b.meta || a.network.spec != b.network.spec) return false;
  const auto pa = a.network.parameters();
  const auto pb = b.network.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].first != pb[i].first || !bits_equal(*pa[i].second, *pb[i].second)) return false;
  }
  return true;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.network.validate();
  std::map<std::string, std::string> meta = ckpt.meta;
  const NetworkSpec& s = ckpt.network.spec;
  meta["spec.input_dim"] = std::to_string(s.input_dim);
  meta["spec.hidden"] = std::to_string(s.hidden);
  meta["spec.layers"] = std::to_string(s.layers);
  meta["spec.output_dim"] = std::to_string(s.output_dim);
  meta["spec.vocab"] = std::to_string(s.vocab);

  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    w.str(k);
    w.str(v);
  }
  const auto params = ckpt.network.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t->rows()));
    w.u32(static_cast<std::uint32_t>(t->cols()));
    // Format annotation: weights deploy as Q1.7, biases on the Q18.14 accumulator grid.
    w.le<std::uint8_t>(1);
    w.le<std::uint8_t>(is_bias(name) ? 32 - kAccumulatorFracBits : 1);
    w.le<std::uint8_t>(is_bias(name) ? kAccumulatorFracBits : 7);
    for (double v : t->data()) w.f64(v);
  }
  return w.take();
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (r.bytes(kMagic.size()) != kMagic) r.fail("bad magic");
  if (const std::uint32_t v = r.u32(); v != kVersion) {
    r.fail(fmt::format("unsupported version {}", v));
  }
  Checkpoint ckpt;
  const std::uint32_t n_meta = r.u32();
  if (n_meta > 4096) r.fail("implausible metadata count");
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    ckpt.meta[k] = r.str();
  }
  NetworkSpec spec;
  spec.input_dim = spec_field(ckpt.meta, "spec.input_dim");
  spec.hidden = spec_field(ckpt.meta, "spec.hidden");
  spec.layers = spec_field(ckpt.meta, "spec.layers");
  spec.output_dim = spec_field(ckpt.meta, "spec.output_dim");
  spec.vocab = spec_field(ckpt.meta, "spec.vocab");
  for (auto it = ckpt.meta.begin(); it != ckpt.meta.end();) {
    it = it->first.starts_with("spec.") ? ckpt.meta.erase(it) : std::next(it);
  }
  if (spec.layers < 1 || spec.layers > 64 || spec.hidden < 1 || spec.hidden > 1 << 16 ||
      spec.input_dim < 1 || spec.output_dim < 1 || spec.vocab < 0) {
    r.fail("implausible network spec");
  }

  Network net = Network::init(spec, 0);
  auto params = net.parameters();
  const std::uint32_t n_tensors = r.u32();
  if (n_tensors != params.size()) {
    r.fail(fmt::format("expected {} tensors, found {}", params.size(), n_tensors));
  }
  for (auto& [name, t] : params) {
    const std::string got = r.str();
    if (got != name) r.fail(fmt::format("expected tensor '{}', found '{}'", name, got));
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows != t->rows() || cols != t->cols()) {
      r.fail(fmt::format("tensor '{}' is {}x{}, spec needs {}", name, rows, cols,
                         t->shape_string()));
    }
    const std::uint8_t has_q = r.u8();
    const std::uint8_t m = r.u8();
    const std::uint8_t n = r.u8();
    if (has_q > 1 || (has_q && (m < 1 || m + n > 32))) r.fail("bad format annotation");
    for (double& v : t->data()) v = r.f64();
  }
  if (!r.at_end()) r.fail("trailing bytes");
  ckpt.network = std::move(net);
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  detail::write_file(path.string(), serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(detail::read_file(path.string()));
}

}  // namespace nnaqat
