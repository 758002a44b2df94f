// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "nnaqat/activation_tables.hpp"
#include "nnaqat/error.hpp"

using namespace nnaqat;

namespace {

const TablePair& tables() {
  static const TablePair t = default_tables();
  return t;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

TEST(DyadicTest, CanonicalForm) {
  const Dyadic d = Dyadic::from_double(0.75);
  EXPECT_EQ(d.mantissa, 3);
  EXPECT_EQ(d.exponent, -2);
  EXPECT_EQ(Dyadic::from_double(0.0), (Dyadic{0, 0}));
  EXPECT_EQ(Dyadic::from_double(-12.0), (Dyadic{-3, 2}));
  EXPECT_EQ(Dyadic::from_double(0.1).value(), 0.1);
  EXPECT_THROW(Dyadic::from_double(std::nan("")), Error);
}

TEST(TanhTableTest, Examples) {
  const PwlTable& t = tables().tanh;
  EXPECT_EQ(t.eval(0.0), 0.0);
  EXPECT_EQ(t.eval(10.0), t.level(255));
  EXPECT_NEAR(t.eval(10.0), 1.0, 0.01);
  const double v = t.eval(0.5);
  EXPECT_LE(std::fabs(v - std::tanh(0.5)), 0.01);
  EXPECT_TRUE(std::find(t.codebook().begin(), t.codebook().end(),
                        static_cast<std::int32_t>(std::ldexp(v, 15))) != t.codebook().end());
}

TEST(TanhTableTest, Invariants) {
  const PwlTable& t = tables().tanh;
  ASSERT_EQ(t.codebook().size(), 256u);
  for (int k = 0; k < 256; ++k) {
    EXPECT_EQ(t.codebook()[k], -t.codebook()[255 - k]);
    if (k > 0) EXPECT_LE(t.codebook()[k - 1], t.codebook()[k]);
  }
  EXPECT_NE(std::find(t.codebook().begin(), t.codebook().end(), 0), t.codebook().end());
  for (std::size_t i = 1; i < t.breakpoints().size(); ++i) {
    EXPECT_LT(t.breakpoints()[i - 1], t.breakpoints()[i]);
  }
  EXPECT_LE(t.lo_index(), t.breakpoints().front());
  EXPECT_GE(t.hi_index(), t.breakpoints().back());
  EXPECT_EQ(t.x_hi(), 4.0);
  EXPECT_EQ(t.x_lo(), -4.0);
  EXPECT_EQ(t.grid_step(), 1.0 / 4096.0);
  EXPECT_EQ(t.segment_count(), 32u);
}

TEST(TanhTableTest, BreakpointsDenserNearZero) {
  const auto& b = tables().tanh.breakpoints();
  const std::size_t mid = b.size() / 2;
  const auto inner = b[mid + 1] - b[mid];
  const auto outer = b.back() - b[b.size() - 2];
  EXPECT_LT(inner, outer);
}

TEST(TanhTableTest, OddSymmetryOnGrid) {
  const PwlTable& t = tables().tanh;
  for (std::int64_t k = 0; k < 40000; k += 7) {
    const double x = std::ldexp(static_cast<double>(k), -12);
    EXPECT_EQ(t.eval(-x), -t.eval(x));
  }
  EXPECT_EQ(t.eval(-0.5), -t.eval(0.5));
}

TEST(TanhTableTest, Codes) {
  const PwlTable& t = tables().tanh;
  EXPECT_EQ(t.code(1e300), 255);
  EXPECT_EQ(t.code(-1e300), 0);
  EXPECT_EQ(t.level(t.code(0.0)), 0.0);
  for (double x : {-3.0, -0.2, 0.7, 2.5}) EXPECT_EQ(t.eval(x), t.level(t.code(x)));
}

TEST(TanhTableTest, InputIsSnappedTowardZero) {
  const PwlTable& t = tables().tanh;
  const double step = t.grid_step();
  EXPECT_EQ(t.grid_index(0.999 * step), 0);
  EXPECT_EQ(t.grid_index(-0.999 * step), 0);
  EXPECT_EQ(t.grid_index(3.5 * step), 3);
  EXPECT_EQ(t.grid_index(-3.5 * step), -3);
  EXPECT_EQ(t.eval(1.0 + 0.5 * step), t.eval(1.0));
}

TEST(SigmoidTableTest, Examples) {
  const PwlTable& s = tables().sigmoid;
  EXPECT_EQ(s.eval(0.0), 0.5);
  EXPECT_EQ(s.eval(-10.0), s.level(0));
  EXPECT_NEAR(s.eval(-10.0), 0.0, 0.01);
  EXPECT_NEAR(s.eval(1.0), 0.7310586, 0.01);
  EXPECT_EQ(s.x_hi(), 7.0);
  EXPECT_EQ(s.x_lo(), -7.0);
  EXPECT_LE(std::fabs(s.eval(7.0) - sigmoid(7.0)), 0.01);
  EXPECT_LE(std::fabs(s.eval(-7.0) - sigmoid(-7.0)), 0.01);
  for (int k = 0; k < 256; ++k) {
    EXPECT_GE(s.level(k), 0.0);
    EXPECT_LE(s.level(k), 1.0);
  }
}

TEST(SigmoidTableTest, TracksShiftedTanh) {
  const PwlTable& s = tables().sigmoid;
  const PwlTable& t = tables().tanh;
  double max_step = 0.0;
  for (int k = 1; k < 256; ++k) max_step = std::max(max_step, s.level(k) - s.level(k - 1));
  for (std::int64_t k = -36000; k <= 36000; k += 13) {
    const double x = std::ldexp(static_cast<double>(k), -12);
    EXPECT_LE(std::fabs(s.eval(x) - (1.0 + t.eval(x / 2)) / 2), max_step) << x;
  }
}

TEST(SigmoidTableTest, RequiresTanhInput) {
  EXPECT_THROW(derive_sigmoid_table(tables().sigmoid), Error);
}

TEST(PwlTableTest, AccuracyMonotonicityAndOccupancy) {
  for (const PwlTable* t : {&tables().tanh, &tables().sigmoid}) {
    const TableReport r = analyze_table(*t);
    EXPECT_LE(r.max_abs_error, 0.01);
    EXPECT_TRUE(r.monotone);
    EXPECT_GE(r.codes_reachable, 200);
  }
}

TEST(PwlTableTest, Deterministic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-9.0, 9.0);
  const TablePair again = default_tables();
  EXPECT_EQ(again.tanh, tables().tanh);
  for (int i = 0; i < 1000; ++i) {
    const double x = d(rng);
    EXPECT_EQ(tables().tanh.eval(x), again.tanh.eval(x));
  }
}

TEST(PwlTableTest, TrueDerivatives) {
  EXPECT_EQ(tables().tanh.reference_derivative(0.0), 1.0);
  EXPECT_EQ(tables().sigmoid.reference_derivative(0.0), 0.25);
  EXPECT_DOUBLE_EQ(tables().tanh.reference(0.5), std::tanh(0.5));
}

TEST(BuildTanhTableTest, ArgumentChecks) {
  EXPECT_THROW(build_tanh_table(3), Error);
  EXPECT_THROW(build_tanh_table(24), Error);
  EXPECT_THROW(build_tanh_table(32, 1.0 / 512.0), Error);
  EXPECT_THROW(build_tanh_table(32, 0.0003), Error);
}

TEST(BuildTanhTableTest, TooFewSegmentsMissBudget) {
  try {
    build_tanh_table(4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConstruction);
    EXPECT_NE(std::string(e.what()).find("max error"), std::string::npos) << e.what();
  }
}

TEST(BuildTanhTableTest, OtherSegmentCounts) {
  const PwlTable t = build_tanh_table(64, 1.0 / 8192.0);
  EXPECT_EQ(t.segment_count(), 64u);
  EXPECT_LE(analyze_table(t).max_abs_error, 0.01);
}

TEST(TableIoTest, RoundTrip) {
  for (const PwlTable* t : {&tables().tanh, &tables().sigmoid}) {
    const std::string text = serialize_table(*t);
    const PwlTable back = parse_table(text);
    EXPECT_EQ(back, *t);
    EXPECT_EQ(serialize_table(back), text);
  }
}

TEST(TableIoTest, TruncatedFileIsParseError) {
  const std::string text = serialize_table(tables().tanh);
  try {
    parse_table(text.substr(0, text.size() / 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
  EXPECT_THROW(parse_table(""), Error);
}

TEST(TableIoTest, UnsortedBreakpointsNameTheInvariant) {
  auto lines = lines_of(serialize_table(tables().tanh));
  std::size_t at = 0;
  while (lines[at].rfind("breakpoints", 0) != 0) ++at;
  std::swap(lines[at + 2], lines[at + 3]);
  try {
    parse_table(join(lines));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidData);
    EXPECT_NE(std::string(e.what()).find("breakpoints"), std::string::npos) << e.what();
  }
}

TEST(TableIoTest, AsymmetricCodebookRejected) {
  auto lines = lines_of(serialize_table(tables().tanh));
  std::size_t at = 0;
  while (lines[at].rfind("codebook", 0) != 0) ++at;
  lines[at + 200] = std::to_string(std::stol(lines[at + 200]) + 1);
  try {
    parse_table(join(lines));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("codebook"), std::string::npos) << e.what();
  }
}

TEST(TableIoTest, UnknownVersionRejected) {
  auto lines = lines_of(serialize_table(tables().tanh));
  lines[0] = "nnaqat-pwl 9";
  EXPECT_THROW(parse_table(join(lines)), Error);
}

}  // namespace
