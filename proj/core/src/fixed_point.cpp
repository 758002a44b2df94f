// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/fixed_point.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nnaqat/error.hpp"

namespace nnaqat {

QFormat::QFormat(int int_bits, int frac_bits) : int_bits_(int_bits), frac_bits_(frac_bits) {
  if (int_bits < 1 || frac_bits < 0 || int_bits + frac_bits > 32) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("invalid Q format Q{}.{}: need m >= 1, n >= 0, m + n <= 32",
                            int_bits, frac_bits));
  }
}

double QFormat::min_value() const { return -std::ldexp(1.0, int_bits_ - 1); }

double QFormat::max_value() const {
  return std::ldexp(1.0, int_bits_ - 1) - std::ldexp(1.0, -frac_bits_);
}

double QFormat::resolution() const { return std::ldexp(1.0, -frac_bits_); }

std::int64_t QFormat::min_code() const { return -(std::int64_t{1} << (total_bits() - 1)); }

std::int64_t QFormat::max_code() const { return (std::int64_t{1} << (total_bits() - 1)) - 1; }

std::string QFormat::name() const { return fmt::format("Q{}.{}", int_bits_, frac_bits_); }

const char* to_string(RoundingMode mode) {
  return mode == RoundingMode::kNearestTiesAway ? "nearest" : "toward_zero";
}

QRange qformat_range(const QFormat& q) { return {q.min_value(), q.max_value(), q.resolution()}; }

DynamicScaleSet::DynamicScaleSet(std::vector<double> scales) : scales_(std::move(scales)) {
  if (scales_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "dynamic scale set is empty");
  }
  bool has_one = false;
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    const double s = scales_[i];
    int exp = 0;
    if (!(s > 0.0) || !std::isfinite(s) || std::frexp(s, &exp) != 0.5) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("dynamic scale {} is not a power of two", s));
    }
    if (i > 0 && !(scales_[i - 1] < s)) {
      throw Error(ErrorCode::kInvalidArgument, "dynamic scales must be strictly ascending");
    }
    has_one = has_one || s == 1.0;
  }
  if (!has_one) {
    throw Error(ErrorCode::kInvalidArgument, "dynamic scale set must contain 1");
  }
}

DynamicScaleSet DynamicScaleSet::standard() { return DynamicScaleSet({1, 2, 4, 8, 16}); }

DynamicScaleSet DynamicScaleSet::sparse() { return DynamicScaleSet({1, 2, 4, 16}); }

namespace {

double round_scaled(double scaled, RoundingMode mode) {
  return mode == RoundingMode::kNearestTiesAway ? std::round(scaled) : std::trunc(scaled);
}

void require_finite(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kInvalidData, fmt::format("non-finite tensor value {}", x));
  }
}

}  // namespace

double quantize_static(double x, const QFormat& q, RoundingMode mode) {
  require_finite(x);
  const double clipped = std::clamp(x, q.min_value(), q.max_value());
  const double code = round_scaled(std::ldexp(clipped, q.frac_bits()), mode);
  // +0.0 normalizes a negative zero produced by truncation.
  return std::ldexp(code, -q.frac_bits()) + 0.0;
}

double select_dynamic_scale(std::span<const double> xs, const QFormat& q,
                            const DynamicScaleSet& scales) {
  double lo = 0.0;
  double hi = 0.0;
  for (double x : xs) {
    require_finite(x);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  for (double s : scales.scales()) {
    // Division by a power of two is exact.
    if (lo / s >= q.min_value() && hi / s <= q.max_value()) return s;
  }
  return scales.largest();
}

DynamicResult quantize_dynamic(std::span<const double> xs, const QFormat& q,
                               const DynamicScaleSet& scales) {
  DynamicResult out;
  if (xs.empty()) return out;
  out.scale = select_dynamic_scale(xs, q, scales);
  out.values.reserve(xs.size());
  for (double x : xs) {
    out.values.push_back(out.scale * quantize_static(x / out.scale, q, RoundingMode::kTowardZero));
  }
  return out;
}

std::int64_t encode(double x, const QFormat& q, RoundingMode mode) {
  return static_cast<std::int64_t>(std::ldexp(quantize_static(x, q, mode), q.frac_bits()));
}

double decode(std::int64_t code, const QFormat& q) {
  if (code < q.min_code() || code > q.max_code()) {
    throw Error(ErrorCode::kInvalidData,
                fmt::format("code {} outside {} range [{}, {}]", code, q.name(), q.min_code(),
                            q.max_code()));
  }
  return std::ldexp(static_cast<double>(code), -q.frac_bits());
}

}  // namespace nnaqat
