// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/activation_tables.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "nnaqat/error.hpp"

namespace nnaqat {

namespace {

constexpr int kSlopeFracBits = 16;
constexpr int kMaxFrameBits = 40;
constexpr double kTanhSaturation = 4.0;
constexpr double kSigmoidSaturation = 7.0;

[[noreturn]] void invariant_violated(const char* name, const std::string& detail) {
  throw Error(ErrorCode::kInvalidData, fmt::format("invariant '{}' violated: {}", name, detail));
}

bool is_power_of_two(double v) {
  int exp = 0;
  return v > 0.0 && std::isfinite(v) && std::frexp(v, &exp) == 0.5;
}

double sech2(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

// Positions 0 = p_0 < ... < p_count = end whose spacing is inversely
// proportional to weight(x), by inverting the trapezoid-integrated cumulative.
template <typename Weight>
std::vector<double> equal_mass_points(double end, int count, Weight weight) {
  constexpr int kFine = 1 << 16;
  std::vector<double> xs(kFine + 1);
  std::vector<double> cum(kFine + 1, 0.0);
  for (int i = 0; i <= kFine; ++i) xs[i] = end * i / kFine;
  for (int i = 1; i <= kFine; ++i) {
    cum[i] = cum[i - 1] + 0.5 * (weight(xs[i - 1]) + weight(xs[i])) * (xs[i] - xs[i - 1]);
  }
  std::vector<double> points(count + 1);
  std::size_t j = 0;
  for (int p = 0; p <= count; ++p) {
    const double target = cum.back() * p / count;
    while (j + 1 < cum.size() && cum[j + 1] < target) ++j;
    if (j + 1 >= cum.size()) {
      points[p] = end;
      continue;
    }
    const double span = cum[j + 1] - cum[j];
    const double frac = span > 0.0 ? (target - cum[j]) / span : 0.0;
    points[p] = xs[j] + frac * (xs[j + 1] - xs[j]);
  }
  points.front() = 0.0;
  points.back() = end;
  return points;
}

}  // namespace

const char* to_string(ActivationKind kind) {
  return kind == ActivationKind::kTanh ? "tanh" : "sigmoid";
}

Dyadic Dyadic::from_double(double v) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidData, "cannot represent a non-finite value as a dyadic");
  }
  if (v == 0.0) return {};
  int exp = 0;
  const double frac = std::frexp(v, &exp);
  Dyadic d{static_cast<std::int64_t>(std::ldexp(frac, 53)), exp - 53};
  while ((d.mantissa & 1) == 0) {
    d.mantissa /= 2;
    ++d.exponent;
  }
  return d;
}

double Dyadic::value() const { return std::ldexp(static_cast<double>(mantissa), exponent); }

PwlTable::PwlTable(ActivationKind kind, int grid_exponent, std::int64_t lo_index,
                   std::int64_t hi_index, std::vector<std::int64_t> breakpoints,
                   std::vector<Dyadic> slopes, std::vector<Dyadic> intercepts,
                   std::vector<std::int32_t> codebook)
    : kind_(kind),
      grid_exponent_(grid_exponent),
      lo_index_(lo_index),
      hi_index_(hi_index),
      breakpoints_(std::move(breakpoints)),
      slopes_(std::move(slopes)),
      intercepts_(std::move(intercepts)),
      codebook_(std::move(codebook)) {
  if (grid_exponent_ > -10 || grid_exponent_ < -24) {
    invariant_violated("grid_step", fmt::format("2^{} outside [2^-24, 2^-10]", grid_exponent_));
  }
  if (breakpoints_.size() < 2) {
    invariant_violated("breakpoints", "need at least two breakpoints");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (breakpoints_[i - 1] >= breakpoints_[i]) {
      invariant_violated("breakpoints", fmt::format("not strictly increasing at index {}", i));
    }
  }
  if (slopes_.size() != breakpoints_.size() - 1 || intercepts_.size() != slopes_.size()) {
    invariant_violated("segments",
                       fmt::format("{} breakpoints need {} slopes and intercepts, got {} and {}",
                                   breakpoints_.size(), breakpoints_.size() - 1, slopes_.size(),
                                   intercepts_.size()));
  }
  const std::int64_t index_limit = std::int64_t{16} << (-grid_exponent_);
  if (!(lo_index_ < hi_index_) || lo_index_ > breakpoints_.front() ||
      hi_index_ < breakpoints_.back() || -lo_index_ > index_limit || hi_index_ > index_limit) {
    invariant_violated("saturation",
                       "need x_lo <= first breakpoint < last breakpoint <= x_hi within [-16, 16]");
  }
  for (std::size_t s = 0; s < slopes_.size(); ++s) {
    const Dyadic& slope = slopes_[s];
    const Dyadic& icpt = intercepts_[s];
    if (slope.mantissa < 0) {
      invariant_violated("slopes", fmt::format("segment {} has a negative slope", s));
    }
    if (Dyadic::from_double(slope.value()) != slope ||
        Dyadic::from_double(icpt.value()) != icpt) {
      invariant_violated("exactness", fmt::format("segment {} is not in canonical form", s));
    }
    const bool frame_ok = slope.mantissa < (std::int64_t{1} << 24) &&
                          -(slope.exponent + grid_exponent_) <= kMaxFrameBits &&
                          -icpt.exponent <= kMaxFrameBits && std::abs(slope.value()) <= 16.0 &&
                          std::abs(icpt.value()) <= 16.0;
    if (!frame_ok) {
      invariant_violated("exactness",
                         fmt::format("segment {} exceeds the exact evaluation frame", s));
    }
  }
  if (codebook_.size() != kCodebookSize) {
    invariant_violated("codebook", fmt::format("expected {} levels, got {}", kCodebookSize,
                                               codebook_.size()));
  }
  for (std::size_t i = 0; i < codebook_.size(); ++i) {
    if (std::abs(codebook_[i]) > (1 << kCodebookFracBits)) {
      invariant_violated("codebook", fmt::format("level {} outside [-1, 1]", i));
    }
    if (i > 0 && codebook_[i - 1] > codebook_[i]) {
      invariant_violated("codebook", fmt::format("levels not sorted at index {}", i));
    }
  }
  if (kind_ == ActivationKind::kTanh) {
    for (int k = 0; k < kCodebookSize; ++k) {
      if (codebook_[k] != -codebook_[kCodebookSize - 1 - k]) {
        invariant_violated("codebook symmetry", fmt::format("level {} is not mirrored", k));
      }
    }
    if (std::find(codebook_.begin(), codebook_.end(), 0) == codebook_.end()) {
      invariant_violated("codebook symmetry", "tanh codebook must contain 0");
    }
  } else {
    if (codebook_.front() < 0) {
      invariant_violated("codebook range", "sigmoid levels must lie in [0, 1]");
    }
  }

  for (std::int32_t c : codebook_) levels_.push_back(std::ldexp(c, -kCodebookFracBits));
  for (std::size_t s = 0; s < slopes_.size(); ++s) {
    slope_values_.push_back(slopes_[s].value());
    intercept_values_.push_back(intercepts_[s].value());
  }
  for (std::size_t i = 1; i + 1 < breakpoints_.size(); ++i) {
    const std::int64_t k = breakpoints_[i];
    const double x_left = std::ldexp(static_cast<double>(k - 1), grid_exponent_);
    const double x_here = std::ldexp(static_cast<double>(k), grid_exponent_);
    const double left = slope_values_[i - 1] * x_left + intercept_values_[i - 1];
    const double right = slope_values_[i] * x_here + intercept_values_[i];
    if (left > right) {
      invariant_violated("monotonicity",
                         fmt::format("value decreases across breakpoint {}", i));
    }
  }
}

double PwlTable::grid_step() const { return std::ldexp(1.0, grid_exponent_); }

double PwlTable::x_lo() const { return std::ldexp(static_cast<double>(lo_index_), grid_exponent_); }

double PwlTable::x_hi() const { return std::ldexp(static_cast<double>(hi_index_), grid_exponent_); }

double PwlTable::level(int code) const { return levels_.at(static_cast<std::size_t>(code)); }

std::int64_t PwlTable::grid_index(double x) const {
  if (std::isnan(x)) {
    throw Error(ErrorCode::kInvalidData, "activation input is NaN");
  }
  // Anything past the saturation bounds maps to the same code.
  const double clipped = std::clamp(x, x_lo() - 1.0, x_hi() + 1.0);
  return static_cast<std::int64_t>(std::trunc(std::ldexp(clipped, -grid_exponent_)));
}

double PwlTable::linear_value(std::int64_t k) const {
  if (k <= lo_index_) return levels_.front();
  if (k >= hi_index_) return levels_.back();
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), k);
  std::ptrdiff_t s = (it - breakpoints_.begin()) - 1;
  s = std::clamp<std::ptrdiff_t>(s, 0, static_cast<std::ptrdiff_t>(slopes_.size()) - 1);
  const double x = std::ldexp(static_cast<double>(k), grid_exponent_);
  return slope_values_[s] * x + intercept_values_[s];
}

int PwlTable::snap(double y) const {
  const auto first = levels_.begin();
  const auto last = levels_.end();
  const auto idx = std::lower_bound(first, last, y) - first;
  double chosen;
  if (idx == 0) {
    chosen = levels_.front();
  } else if (idx == kCodebookSize) {
    chosen = levels_.back();
  } else {
    const double below = levels_[idx - 1];
    const double above = levels_[idx];
    const double d_below = y - below;
    const double d_above = above - y;
    if (d_below < d_above) {
      chosen = below;
    } else if (d_above < d_below) {
      chosen = above;
    } else {
      chosen = y >= 0.0 ? above : below;
    }
  }
  if (y >= 0.0) return static_cast<int>(std::upper_bound(first, last, chosen) - first) - 1;
  return static_cast<int>(std::lower_bound(first, last, chosen) - first);
}

int PwlTable::code_at(std::int64_t k) const {
  if (k <= lo_index_) return 0;
  if (k >= hi_index_) return kCodebookSize - 1;
  return snap(linear_value(k));
}

double PwlTable::reference(double x) const {
  if (kind_ == ActivationKind::kTanh) return std::tanh(x);
  return 1.0 / (1.0 + std::exp(-x));
}

double PwlTable::reference_derivative(double x) const {
  if (kind_ == ActivationKind::kTanh) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  }
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 - s);
}

namespace {

void require_budget(const PwlTable& table) {
  const TableReport report = analyze_table(table, -8.0, 8.0, 200'001);
  if (report.max_abs_error > kPwlErrorBudget) {
    throw Error(ErrorCode::kConstruction,
                fmt::format("{} table misses the {} error budget: achieved max error {:.6f} "
                            "with {} segments",
                            to_string(table.kind()), kPwlErrorBudget, report.max_abs_error,
                            table.segment_count()));
  }
}

}  // namespace

PwlTable build_tanh_table(int segments, double grid_step) {
  if (segments < 4 || (segments & (segments - 1)) != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("segment count {} must be a power of two >= 4", segments));
  }
  if (!is_power_of_two(grid_step) || grid_step > std::ldexp(1.0, -10) ||
      grid_step < std::ldexp(1.0, -24)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("grid step {} must be a power of two in [2^-24, 2^-10]", grid_step));
  }
  int grid_exponent = 0;
  std::frexp(grid_step, &grid_exponent);
  grid_exponent -= 1;

  const int half = segments / 2;
  const auto sat_index = static_cast<std::int64_t>(std::ldexp(kTanhSaturation, -grid_exponent));

  const std::vector<double> knots =
      equal_mass_points(kTanhSaturation, half, [](double x) { return std::sqrt(sech2(x)); });
  std::vector<std::int64_t> pos_bps(half + 1);
  for (int i = 0; i <= half; ++i) {
    pos_bps[i] = static_cast<std::int64_t>(std::llround(std::ldexp(knots[i], -grid_exponent)));
  }
  pos_bps.front() = 0;
  pos_bps.back() = sat_index;
  for (int i = 1; i <= half; ++i) {
    if (pos_bps[i] <= pos_bps[i - 1]) {
      throw Error(ErrorCode::kConstruction, "breakpoints collapse on the input grid");
    }
  }

  // Chord slopes on the positive half, chained so the curve is continuous.
  std::vector<double> pos_slopes(half);
  std::vector<double> pos_icpts(half);
  double y_left = 0.0;
  for (int i = 0; i < half; ++i) {
    const double x0 = std::ldexp(static_cast<double>(pos_bps[i]), grid_exponent);
    const double x1 = std::ldexp(static_cast<double>(pos_bps[i + 1]), grid_exponent);
    const double chord = (std::tanh(x1) - std::tanh(x0)) / (x1 - x0);
    const double slope = std::ldexp(std::round(std::ldexp(chord, kSlopeFracBits)), -kSlopeFracBits);
    pos_slopes[i] = slope;
    pos_icpts[i] = y_left - slope * x0;
    y_left += slope * (x1 - x0);
  }

  std::vector<std::int64_t> bps;
  std::vector<Dyadic> slopes;
  std::vector<Dyadic> icpts;
  for (int i = half; i >= 1; --i) bps.push_back(-pos_bps[i]);
  for (int i = 0; i <= half; ++i) bps.push_back(pos_bps[i]);
  for (int i = half - 1; i >= 0; --i) {
    slopes.push_back(Dyadic::from_double(pos_slopes[i]));
    icpts.push_back(Dyadic::from_double(-pos_icpts[i] + 0.0));
  }
  for (int i = 0; i < half; ++i) {
    slopes.push_back(Dyadic::from_double(pos_slopes[i]));
    icpts.push_back(Dyadic::from_double(pos_icpts[i]));
  }

  constexpr int kHalfLevels = PwlTable::kCodebookSize / 2;
  const std::vector<double> level_x = equal_mass_points(
      kTanhSaturation, kHalfLevels - 1, [](double x) { return std::pow(sech2(x), 2.0 / 3.0); });
  std::vector<std::int32_t> half_levels(kHalfLevels);
  for (int j = 0; j < kHalfLevels; ++j) {
    half_levels[j] = static_cast<std::int32_t>(
        std::lround(std::ldexp(std::tanh(level_x[j]), PwlTable::kCodebookFracBits)));
    if (j > 0 && half_levels[j] <= half_levels[j - 1]) {
      throw Error(ErrorCode::kConstruction, "codebook levels collapse at 2^-15 resolution");
    }
  }
  std::vector<std::int32_t> codebook;
  for (int j = kHalfLevels - 1; j >= 0; --j) codebook.push_back(-half_levels[j]);
  for (int j = 0; j < kHalfLevels; ++j) codebook.push_back(half_levels[j]);

  PwlTable table(ActivationKind::kTanh, grid_exponent, -sat_index, sat_index, std::move(bps),
                 std::move(slopes), std::move(icpts), std::move(codebook));
  require_budget(table);
  return table;
}

PwlTable derive_sigmoid_table(const PwlTable& tanh_table) {
  if (tanh_table.kind() != ActivationKind::kTanh) {
    throw Error(ErrorCode::kInvalidArgument, "sigmoid tables derive from a tanh table");
  }
  const int g = tanh_table.grid_exponent();
  const auto sat_index = static_cast<std::int64_t>(std::ldexp(kSigmoidSaturation, -g));
  const auto& tb = tanh_table.breakpoints();

  // sigmoid(x) = (1 + tanh(x/2)) / 2: tanh breakpoint b maps to 2b.
  std::vector<std::int64_t> bps{-sat_index};
  for (std::int64_t b : tb) {
    if (2 * b > -sat_index && 2 * b < sat_index) bps.push_back(2 * b);
  }
  bps.push_back(sat_index);

  std::vector<Dyadic> slopes;
  std::vector<Dyadic> icpts;
  for (std::size_t j = 0; j + 1 < bps.size(); ++j) {
    // Tanh segment containing bps[j] / 2.
    auto it = std::upper_bound(tb.begin(), tb.end(), bps[j],
                               [](std::int64_t v, std::int64_t b) { return v < 2 * b; });
    std::ptrdiff_t s = (it - tb.begin()) - 1;
    s = std::clamp<std::ptrdiff_t>(s, 0, static_cast<std::ptrdiff_t>(tanh_table.segment_count()) - 1);
    const Dyadic& ts = tanh_table.slopes()[s];
    slopes.push_back(ts.mantissa == 0 ? Dyadic{} : Dyadic{ts.mantissa, ts.exponent - 2});
    icpts.push_back(Dyadic::from_double((1.0 + tanh_table.intercepts()[s].value()) / 2.0));
  }

  std::vector<std::int32_t> codebook;
  for (std::int32_t c : tanh_table.codebook()) {
    codebook.push_back(((1 << PwlTable::kCodebookFracBits) + c + 1) >> 1);
  }

  PwlTable table(ActivationKind::kSigmoid, g, -sat_index, sat_index, std::move(bps),
                 std::move(slopes), std::move(icpts), std::move(codebook));
  require_budget(table);
  return table;
}

TablePair default_tables() {
  static const TablePair cached = [] {
    PwlTable t = build_tanh_table();
    PwlTable s = derive_sigmoid_table(t);
    return TablePair{std::move(t), std::move(s)};
  }();
  return cached;
}

TableReport analyze_table(const PwlTable& table, double lo, double hi, std::size_t samples) {
  TableReport report;
  report.samples = samples;
  double prev = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x =
        samples == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double y = table.eval(x);
    const double err = std::abs(y - table.reference(x));
    report.max_abs_error = std::max(report.max_abs_error, err);
    sum += err;
    if (y < prev) report.monotone = false;
    prev = y;
  }
  report.mean_abs_error = samples > 0 ? sum / static_cast<double>(samples) : 0.0;

  std::vector<bool> seen(PwlTable::kCodebookSize, false);
  for (std::int64_t k = table.lo_index() - 1; k <= table.hi_index() + 1; ++k) {
    seen[table.code_at(k)] = true;
  }
  report.codes_reachable = static_cast<int>(std::count(seen.begin(), seen.end(), true));
  return report;
}

// Text layout (one record per line, '#' comments allowed):
//   nnaqat-pwl <version>
//   function <tanh|sigmoid>
//   grid_exponent <e>
//   saturation <lo_index> <hi_index>
//   breakpoints <count>      then <count> lines "<mantissa> <exponent>"
//   segments <count>         then lines "<slope_m> <slope_e> <intercept_m> <intercept_e>"
//   codebook 256             then 256 lines "<level in units of 2^-15>"
//   end
std::string serialize_table(const PwlTable& table) {
  std::ostringstream out;
  out << "nnaqat-pwl 1\n";
  out << "function " << to_string(table.kind()) << '\n';
  out << "grid_exponent " << table.grid_exponent() << '\n';
  out << "saturation " << table.lo_index() << ' ' << table.hi_index() << '\n';
  out << "breakpoints " << table.breakpoints().size() << '\n';
  for (std::int64_t k : table.breakpoints()) {
    const Dyadic d = Dyadic::from_double(std::ldexp(static_cast<double>(k), table.grid_exponent()));
    out << d.mantissa << ' ' << d.exponent << '\n';
  }
  out << "segments " << table.segment_count() << '\n';
  for (std::size_t s = 0; s < table.segment_count(); ++s) {
    const Dyadic& m = table.slopes()[s];
    const Dyadic& b = table.intercepts()[s];
    out << m.mantissa << ' ' << m.exponent << ' ' << b.mantissa << ' ' << b.exponent << '\n';
  }
  out << "codebook " << table.codebook().size() << '\n';
  for (std::int32_t c : table.codebook()) out << c << '\n';
  out << "end\n";
  return out.str();
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : in_(std::string(text)) {}

  std::istringstream next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      return std::istringstream(line);
    }
    fail(fmt::format("unexpected end of file, expecting {}", expecting));
  }

  template <typename... Ts>
  void read(const char* expecting, Ts&... values) {
    std::istringstream ls = next(expecting);
    (ls >> ... >> values);
    std::string extra;
    if (ls.fail() || (ls >> extra)) fail(fmt::format("malformed {} record", expecting));
  }

  std::int64_t header(const char* key) {
    std::string word;
    std::int64_t value = 0;
    read(key, word, value);
    if (word != key) fail(fmt::format("expected '{}', found '{}'", key, word));
    return value;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kParse, fmt::format("table line {}: {}", line_no_, what));
  }

 private:
  std::istringstream in_;
  int line_no_ = 0;
};

}  // namespace

PwlTable parse_table(std::string_view text) {
  LineReader reader(text);
  if (reader.header("nnaqat-pwl") != 1) reader.fail("unsupported table version");

  std::string key;
  std::string fn;
  reader.read("function", key, fn);
  if (key != "function" || (fn != "tanh" && fn != "sigmoid")) {
    reader.fail("expected 'function tanh|sigmoid'");
  }
  const auto kind = fn == "tanh" ? ActivationKind::kTanh : ActivationKind::kSigmoid;
  const auto grid_exponent = reader.header("grid_exponent");
  if (grid_exponent < -60 || grid_exponent > 60) reader.fail("grid exponent out of range");

  std::int64_t lo = 0;
  std::int64_t hi = 0;
  reader.read("saturation", key, lo, hi);
  if (key != "saturation") reader.fail("expected 'saturation'");

  const auto bp_count = reader.header("breakpoints");
  if (bp_count < 0 || bp_count > 1 << 20) reader.fail("implausible breakpoint count");
  std::vector<std::int64_t> bps;
  for (std::int64_t i = 0; i < bp_count; ++i) {
    Dyadic d;
    reader.read("breakpoint", d.mantissa, d.exponent);
    const double x = d.value();
    const double scaled = std::ldexp(x, -static_cast<int>(grid_exponent));
    if (std::trunc(scaled) != scaled || std::abs(scaled) > 0x1p52) {
      reader.fail(fmt::format("breakpoint {} is not aligned to the input grid", i));
    }
    bps.push_back(static_cast<std::int64_t>(scaled));
  }

  const auto seg_count = reader.header("segments");
  if (seg_count < 0 || seg_count > 1 << 20) reader.fail("implausible segment count");
  std::vector<Dyadic> slopes;
  std::vector<Dyadic> icpts;
  for (std::int64_t i = 0; i < seg_count; ++i) {
    Dyadic m;
    Dyadic b;
    reader.read("segment", m.mantissa, m.exponent, b.mantissa, b.exponent);
    slopes.push_back(m);
    icpts.push_back(b);
  }

  const auto cb_count = reader.header("codebook");
  if (cb_count < 0 || cb_count > 1 << 20) reader.fail("implausible codebook size");
  std::vector<std::int32_t> codebook;
  for (std::int64_t i = 0; i < cb_count; ++i) {
    std::int32_t c = 0;
    reader.read("codebook level", c);
    codebook.push_back(c);
  }
  std::string end;
  reader.read("end", end);
  if (end != "end") reader.fail("missing 'end'");

  return PwlTable(kind, static_cast<int>(grid_exponent), lo, hi, std::move(bps),
                  std::move(slopes), std::move(icpts), std::move(codebook));
}

void save_table(const PwlTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out << serialize_table(table);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "failed writing " + path.string());
}

PwlTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str());
}

}  // namespace nnaqat
