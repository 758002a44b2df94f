// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "nnaqat/qnn.hpp"

namespace nnaqat {

// Network weights plus free-form string metadata (training stage, seed, ...).
struct Checkpoint {
  Network network;
  std::map<std::string, std::string> meta;

  friend bool operator==(const Checkpoint& a, const Checkpoint& b);
};

// Binary layout (little-endian), documented in docs/formats.md:
//   "NNAQCKPT" u32 version
//   u32 n_meta   { str key, str value } * n_meta
//   u32 n_tensor { str name, u32 rows, u32 cols, u8 has_q, u8 m, u8 n, f64 * rows*cols } * n_tensor
// The network spec is carried in meta keys "spec.*".
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace nnaqat
