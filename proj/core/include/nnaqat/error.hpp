// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace nnaqat {

enum class ErrorCode {
  kInvalidArgument,  // bad configuration or API misuse
  kInvalidData,      // non-finite values, out-of-range codes, corrupted payloads
  kParse,            // malformed file bytes
  kShapeMismatch,
  kOverflow,         // integer accumulator would wrap
  kConstruction,     // a table could not meet its error budget
  kDivergence,       // training produced non-finite loss, or traces disagree
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nnaqat
