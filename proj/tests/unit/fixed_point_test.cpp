// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nnaqat/error.hpp"
#include "nnaqat/fixed_point.hpp"

using namespace nnaqat;

namespace {

constexpr auto kNearest = RoundingMode::kNearestTiesAway;
constexpr auto kTrunc = RoundingMode::kTowardZero;

TEST(QFormatTest, RangeQ3_2) {
  const QRange r = qformat_range(QFormat(3, 2));
  EXPECT_EQ(r.min, -4.0);
  EXPECT_EQ(r.max, 3.75);
  EXPECT_EQ(r.resolution, 0.25);
}

TEST(QFormatTest, RangeQ1_7) {
  const QRange r = qformat_range(kQ1_7);
  EXPECT_EQ(r.min, -1.0);
  EXPECT_EQ(r.max, 0.9921875);
  EXPECT_EQ(r.resolution, 0.0078125);
}

TEST(QFormatTest, RangeQ1_0) {
  const QRange r = qformat_range(QFormat(1, 0));
  EXPECT_EQ(r.min, -1.0);
  EXPECT_EQ(r.max, 0.0);
  EXPECT_EQ(r.resolution, 1.0);
}

TEST(QFormatTest, InvalidFormatsAreRejected) {
  EXPECT_THROW(QFormat(0, 7), Error);
  EXPECT_THROW(QFormat(1, -1), Error);
  EXPECT_THROW(QFormat(20, 20), Error);
}

TEST(QuantizeStaticTest, Examples) {
  EXPECT_EQ(quantize_static(3.9, QFormat(3, 2), kNearest), 3.75);
  EXPECT_EQ(quantize_static(0.13, kQ1_7, kNearest), 17.0 / 128.0);
  EXPECT_EQ(quantize_static(-0.13, kQ1_7, kTrunc), -16.0 / 128.0);
  for (const QFormat q : {kQ1_7, QFormat(3, 2), QFormat(1, 0), QFormat(8, 8)}) {
    for (RoundingMode m : {kNearest, kTrunc}) EXPECT_EQ(quantize_static(0.0, q, m), 0.0);
  }
}

TEST(QuantizeStaticTest, TiesGoAwayFromZero) {
  EXPECT_EQ(quantize_static(0.5 / 128.0, kQ1_7, kNearest), 1.0 / 128.0);
  EXPECT_EQ(quantize_static(-0.5 / 128.0, kQ1_7, kNearest), -1.0 / 128.0);
  EXPECT_EQ(quantize_static(2.5 / 128.0, kQ1_7, kNearest), 3.0 / 128.0);
}

TEST(QuantizeStaticTest, NonFiniteInputThrowsInvalidData) {
  for (double x : {std::nan(""), std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()}) {
    try {
      quantize_static(x, kQ1_7, kNearest);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidData);
    }
  }
}

TEST(QuantizeStaticTest, Properties) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wide(-10.0, 10.0);
  for (const QFormat q : {kQ1_7, QFormat(3, 2), QFormat(2, 5), QFormat(5, 26)}) {
    const QRange r = qformat_range(q);
    std::uniform_real_distribution<double> in(r.min, r.max);
    for (int i = 0; i < 20000; ++i) {
      const double x = wide(rng);
      const double y = wide(rng);
      for (RoundingMode m : {kNearest, kTrunc}) {
        const double qx = quantize_static(x, q, m);
        EXPECT_EQ(quantize_static(qx, q, m), qx);
        if (x <= y) EXPECT_LE(qx, quantize_static(y, q, m));
      }
      const double v = in(rng);
      EXPECT_LE(std::fabs(v - quantize_static(v, q, kNearest)), r.resolution / 2);
      const double t = quantize_static(v, q, kTrunc);
      EXPECT_LT(std::fabs(v - t), r.resolution);
      EXPECT_LE(std::fabs(t), std::fabs(v));
      if (std::fabs(v) <= r.max) EXPECT_EQ(quantize_static(-v, q, kNearest), -quantize_static(v, q, kNearest));
    }
  }
}

TEST(CodecTest, Examples) {
  const QFormat q(3, 2);
  EXPECT_EQ(encode(3.75, q, kNearest), 15);
  EXPECT_EQ(decode(15, q), 3.75);
  EXPECT_EQ(encode(-4.0, q, kNearest), -16);
  EXPECT_EQ(encode(0.0, kQ1_7, kNearest), 0);
}

TEST(CodecTest, RoundTripAllQ1_7Codes) {
  for (std::int64_t code = -128; code <= 127; ++code) {
    const double v = decode(code, kQ1_7);
    EXPECT_EQ(encode(v, kQ1_7, kNearest), code);
    EXPECT_EQ(encode(v, kQ1_7, kTrunc), code);
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int i = 0; i < 100000; ++i) {
    const double x = d(rng);
    for (RoundingMode m : {kNearest, kTrunc}) {
      ASSERT_EQ(decode(encode(x, kQ1_7, m), kQ1_7), quantize_static(x, kQ1_7, m));
    }
  }
}

TEST(CodecTest, OutOfRangeDecodeIsInvalidData) {
  try {
    decode(128, kQ1_7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidData);
  }
  EXPECT_THROW(decode(-129, kQ1_7), Error);
}

TEST(DynamicScaleSetTest, Presets) {
  EXPECT_EQ(DynamicScaleSet::standard().scales(), (std::vector<double>{1, 2, 4, 8, 16}));
  EXPECT_EQ(DynamicScaleSet::sparse().scales(), (std::vector<double>{1, 2, 4, 16}));
}

TEST(DynamicScaleSetTest, InvariantsEnforced) {
  EXPECT_THROW(DynamicScaleSet({2, 4}), Error);     // missing 1
  EXPECT_THROW(DynamicScaleSet({1, 3}), Error);     // not a power of two
  EXPECT_THROW(DynamicScaleSet({1, 4, 2}), Error);  // not ascending
  EXPECT_THROW(DynamicScaleSet({}), Error);
  EXPECT_NO_THROW(DynamicScaleSet({1}));
}

TEST(QuantizeDynamicTest, InRangeUsesUnitScale) {
  const std::vector<double> xs{0.1, -0.9, 0.99, 0.013};
  const DynamicResult r = quantize_dynamic(xs, kQ1_7, DynamicScaleSet::standard());
  EXPECT_EQ(r.scale, 1.0);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_EQ(r.values[i], quantize_static(xs[i], kQ1_7, kTrunc));
}

TEST(QuantizeDynamicTest, Examples) {
  const std::vector<double> a{1.5, 0.25};
  const DynamicResult ra = quantize_dynamic(a, kQ1_7, DynamicScaleSet::standard());
  EXPECT_EQ(ra.scale, 2.0);
  EXPECT_EQ(ra.values[0], 1.5);
  const std::vector<double> b{40.0, -0.5};
  const DynamicResult rb = quantize_dynamic(b, kQ1_7, DynamicScaleSet::standard());
  EXPECT_EQ(rb.scale, 16.0);
  EXPECT_EQ(rb.values[0], 15.875);
  EXPECT_EQ(rb.values[1], -0.5);
}

TEST(QuantizeDynamicTest, SparseSetSkipsEight) {
  const std::vector<double> xs{5.0};
  EXPECT_EQ(quantize_dynamic(xs, kQ1_7, DynamicScaleSet::standard()).scale, 8.0);
  EXPECT_EQ(quantize_dynamic(xs, kQ1_7, DynamicScaleSet::sparse()).scale, 16.0);
}

TEST(QuantizeDynamicTest, NegativeBoundFitsWithoutScaling) {
  const std::vector<double> xs{-1.0};
  EXPECT_EQ(quantize_dynamic(xs, kQ1_7, DynamicScaleSet::standard()).scale, 1.0);
  const std::vector<double> ys{1.0};
  EXPECT_EQ(quantize_dynamic(ys, kQ1_7, DynamicScaleSet::standard()).scale, 2.0);
}

TEST(QuantizeDynamicTest, EmptyTensor) {
  const DynamicResult r = quantize_dynamic({}, kQ1_7, DynamicScaleSet::standard());
  EXPECT_EQ(r.scale, 1.0);
  EXPECT_TRUE(r.values.empty());
}

TEST(QuantizeDynamicTest, NonFiniteThrows) {
  const std::vector<double> xs{0.5, std::nan("")};
  EXPECT_THROW(quantize_dynamic(xs, kQ1_7, DynamicScaleSet::standard()), Error);
}

TEST(QuantizeDynamicTest, Minimality) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-20.0, 20.0);
  const auto& set = DynamicScaleSet::standard();
  for (int t = 0; t < 5000; ++t) {
    std::vector<double> xs(4);
    for (double& x : xs) x = d(rng) * std::ldexp(1.0, -(t % 6));
    const double s = select_dynamic_scale(xs, kQ1_7, set);
    if (s > 1.0) {
      bool exceeds = false;
      for (double x : xs) exceeds = exceeds || x / (s / 2) < -1.0 || x / (s / 2) > 0.9921875;
      EXPECT_TRUE(exceeds);
    }
  }
}

}  // namespace
