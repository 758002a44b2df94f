// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nnaqat {

// Signed fixed-point format Qm.n: m integer bits (sign included) and n
// fractional bits. Construction validates, so every QFormat value is usable.
class QFormat {
 public:
  QFormat(int int_bits, int frac_bits);

  int int_bits() const { return int_bits_; }
  int frac_bits() const { return frac_bits_; }
  int total_bits() const { return int_bits_ + frac_bits_; }

  double min_value() const;
  double max_value() const;
  double resolution() const;

  std::int64_t min_code() const;
  std::int64_t max_code() const;

  std::string name() const;  // "Q1.7"

  friend bool operator==(const QFormat&, const QFormat&) = default;

 private:
  int int_bits_;
  int frac_bits_;
};

inline const QFormat kQ1_7{1, 7};

enum class RoundingMode {
  kNearestTiesAway,  // weights
  kTowardZero,       // inputs and hidden states
};

const char* to_string(RoundingMode mode);

struct QRange {
  double min;
  double max;
  double resolution;
};

QRange qformat_range(const QFormat& q);

// Allowed power-of-two multipliers for dynamic quantization, ascending and
// always containing 1.
class DynamicScaleSet {
 public:
  explicit DynamicScaleSet(std::vector<double> scales);

  // {1, 2, 4, 8, 16}
  static DynamicScaleSet standard();
  // {1, 2, 4, 16}
  static DynamicScaleSet sparse();

  const std::vector<double>& scales() const { return scales_; }
  double largest() const { return scales_.back(); }

  friend bool operator==(const DynamicScaleSet&, const DynamicScaleSet&) = default;

 private:
  std::vector<double> scales_;
};

// Clip to [f_min, f_max], scale by 2^n, round, scale back. Throws
// ErrorCode::kInvalidData on non-finite input.
double quantize_static(double x, const QFormat& q, RoundingMode mode);

struct DynamicResult {
  std::vector<double> values;
  double scale = 1.0;
};

// Chooses the smallest allowed scale S that brings every x/S into range (or
// the largest scale when none does, in which case values clip) and returns
// S * quantize_static(x / S, q, kTowardZero) elementwise.
DynamicResult quantize_dynamic(std::span<const double> xs, const QFormat& q,
                               const DynamicScaleSet& scales);

// Scale selection only; shared by quantize_dynamic and the autodiff node.
double select_dynamic_scale(std::span<const double> xs, const QFormat& q,
                            const DynamicScaleSet& scales);

// Integer code of quantize_static(x, q, mode).
std::int64_t encode(double x, const QFormat& q, RoundingMode mode);
// Inverse of encode. Out-of-range codes throw ErrorCode::kInvalidData.
double decode(std::int64_t code, const QFormat& q);

}  // namespace nnaqat
