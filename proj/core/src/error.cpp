// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/error.hpp"

namespace nnaqat {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kInvalidData: return "invalid data";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kOverflow: return "accumulator overflow";
    case ErrorCode::kConstruction: return "construction failed";
    case ErrorCode::kDivergence: return "divergence";
  }
  return "unknown";
}

}  // namespace nnaqat
