// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nnaqat {

enum class ActivationKind { kTanh, kSigmoid };

const char* to_string(ActivationKind kind);

// Exact binary rational mantissa * 2^exponent, kept in canonical form (odd
// mantissa, or zero with exponent 0) so equal values compare equal.
struct Dyadic {
  std::int64_t mantissa = 0;
  int exponent = 0;

  static Dyadic from_double(double v);  // exact; throws if v is not finite
  double value() const;

  friend bool operator==(const Dyadic&, const Dyadic&) = default;
};

// Piecewise-linear activation with a 256-entry non-uniform output codebook.
//
// Evaluation is a pure function of the input grid index k = trunc(x / grid_step):
//   k <= lo_index           -> code 0
//   k >= hi_index           -> code 255
//   otherwise               -> y = slope[s] * k * grid_step + intercept[s] for the
//                              segment s with breakpoint[s] <= k < breakpoint[s+1],
//                              then the nearest codebook level.
// Ties between two distinct levels go to the higher level when y >= 0 and the
// lower level otherwise. Among duplicated levels the highest index is used for
// y >= 0 and the lowest for y < 0, which keeps tanh codes odd-symmetric.
class PwlTable {
 public:
  static constexpr int kCodebookSize = 256;
  static constexpr int kCodebookFracBits = 15;

  // Validates every invariant; violations throw ErrorCode::kInvalidData with a
  // message of the form "invariant '<name>' violated: ...".
  PwlTable(ActivationKind kind, int grid_exponent, std::int64_t lo_index, std::int64_t hi_index,
           std::vector<std::int64_t> breakpoints, std::vector<Dyadic> slopes,
           std::vector<Dyadic> intercepts, std::vector<std::int32_t> codebook);

  ActivationKind kind() const { return kind_; }
  int grid_exponent() const { return grid_exponent_; }
  double grid_step() const;
  std::int64_t lo_index() const { return lo_index_; }
  std::int64_t hi_index() const { return hi_index_; }
  double x_lo() const;
  double x_hi() const;

  // Breakpoints as grid indices.
  const std::vector<std::int64_t>& breakpoints() const { return breakpoints_; }
  const std::vector<Dyadic>& slopes() const { return slopes_; }
  const std::vector<Dyadic>& intercepts() const { return intercepts_; }
  std::size_t segment_count() const { return slopes_.size(); }

  // Codebook in units of 2^-15.
  const std::vector<std::int32_t>& codebook() const { return codebook_; }
  double level(int code) const;

  std::int64_t grid_index(double x) const;
  // Piecewise-linear value before snapping (reporting only; saturated inputs
  // return the pinned level).
  double linear_value(std::int64_t k) const;
  int code_at(std::int64_t k) const;

  int code(double x) const { return code_at(grid_index(x)); }
  double eval(double x) const { return level(code(x)); }

  // Exact true function and its derivative.
  double reference(double x) const;
  double reference_derivative(double x) const;

  friend bool operator==(const PwlTable&, const PwlTable&) = default;

 private:
  int snap(double y) const;

  ActivationKind kind_;
  int grid_exponent_;
  std::int64_t lo_index_;
  std::int64_t hi_index_;
  std::vector<std::int64_t> breakpoints_;
  std::vector<Dyadic> slopes_;
  std::vector<Dyadic> intercepts_;
  std::vector<std::int32_t> codebook_;
  std::vector<double> levels_;
  std::vector<double> slope_values_;
  std::vector<double> intercept_values_;
};

inline constexpr int kDefaultPwlSegments = 32;
inline constexpr int kDefaultGridExponent = -12;
inline constexpr double kPwlErrorBudget = 0.01;

// Gradient-proportional breakpoints (density ~ sqrt(tanh')) on [-4, 4] and a
// companded codebook (level density ~ tanh'^(2/3) in the input domain).
// Throws ErrorCode::kConstruction when the result misses the 0.01 budget on
// [-8, 8], and kInvalidArgument for a bad segment count or grid step.
PwlTable build_tanh_table(int segments = kDefaultPwlSegments,
                          double grid_step = 1.0 / 4096.0);

// sigmoid(x) = (1 + tanh(x / 2)) / 2, re-snapped to its own codebook and
// saturated at +-7.
PwlTable derive_sigmoid_table(const PwlTable& tanh_table);

struct TablePair {
  PwlTable tanh;
  PwlTable sigmoid;
};

TablePair default_tables();

struct TableReport {
  double max_abs_error = 0.0;
  double mean_abs_error = 0.0;
  int codes_reachable = 0;
  bool monotone = true;
  std::size_t samples = 0;
};

// Dense uniform grid over [lo, hi].
TableReport analyze_table(const PwlTable& table, double lo = -8.0, double hi = 8.0,
                          std::size_t samples = 1'000'001);

// Versioned plain-text table file; see docs/formats.md.
std::string serialize_table(const PwlTable& table);
PwlTable parse_table(std::string_view text);

void save_table(const PwlTable& table, const std::filesystem::path& path);
PwlTable load_table(const std::filesystem::path& path);

}  // namespace nnaqat
