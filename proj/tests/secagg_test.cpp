#include "fedgat/secagg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fedgat/rng.hpp"

namespace fedgat {
namespace {

TEST(FixedPoint, KnownEncodings) {
  FixedPointCodec codec;  // 20 fractional bits
  const auto q = encode_fixed(std::vector<double>{0.5, -1.0, 0.0}, codec);
  EXPECT_EQ(q[0], 524288);    // 0.5 * 2^20
  EXPECT_EQ(q[1], -1048576);  // -1.0 * 2^20
  EXPECT_EQ(q[2], 0);
  const auto back = decode_fixed(q, codec);
  EXPECT_DOUBLE_EQ(back[0], 0.5);
  EXPECT_DOUBLE_EQ(back[1], -1.0);
}

TEST(FixedPoint, RoundTripErrorWithinHalfStep) {
  FixedPointCodec codec;
  Rng rng(31);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = 2000.0 * (rng.uniform() - 0.5);
  const auto back = decode_fixed(encode_fixed(xs, codec), codec);
  const double step = 1.0 / codec.scale();
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(back[i], xs[i], step);
}

TEST(FixedPoint, OverflowNamesTheCoordinate) {
  FixedPointCodec codec;
  std::vector<double> xs{0.0, 0.0, 0.0, codec.max_magnitude * 2.0};
  try {
    encode_fixed(xs, codec);
    FAIL() << "expected overflow";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 3"), std::string::npos) << e.what();
  }
  // NaN is also rejected (the magnitude guard is written to catch it).
  EXPECT_THROW(encode_fixed(std::vector<double>{std::nan("")}, codec), std::invalid_argument);
}

TEST(FixedPoint, EncodingsAddHomomorphically) {
  FixedPointCodec codec;
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = 100.0 * (rng.uniform() - 0.5);
    const double y = 100.0 * (rng.uniform() - 0.5);
    const auto qx = encode_fixed(std::vector<double>{x}, codec);
    const auto qy = encode_fixed(std::vector<double>{y}, codec);
    const double sum = decode_fixed(std::vector<std::int64_t>{qx[0] + qy[0]}, codec)[0];
    EXPECT_NEAR(sum, x + y, 2.0 / codec.scale());
  }
}

TEST(RingEmbed, TwosComplementRoundTrip) {
  const std::vector<std::int64_t> q{0, 1, -1, 524288, -1048576};
  const auto extracted = ring_extract(ring_embed(q));
  EXPECT_EQ(extracted, q);
}

TEST(PairwiseSecrets, DealIsDeterministicAndPairSymmetric) {
  const PairwiseSecrets a = PairwiseSecrets::deal(5, 42);
  const PairwiseSecrets b = PairwiseSecrets::deal(5, 42);
  const PairwiseSecrets c = PairwiseSecrets::deal(5, 43);
  EXPECT_EQ(a.get(0, 1), b.get(0, 1));
  EXPECT_EQ(a.get(2, 4), b.get(2, 4));
  EXPECT_NE(a.get(0, 1), c.get(0, 1));
  // Unordered pairs share one secret.
  EXPECT_EQ(a.get(1, 3), a.get(3, 1));
  // Distinct pairs get distinct secrets.
  EXPECT_NE(a.get(0, 1), a.get(0, 2));
  EXPECT_THROW(a.get(1, 1), std::invalid_argument);
  EXPECT_THROW(a.get(0, 5), std::invalid_argument);
}

TEST(Masking, SingleClientIsIdentity) {
  const PairwiseSecrets secrets = PairwiseSecrets::deal(1, 7);
  const std::vector<std::uint64_t> enc{1, 2, 3, 0xffffffffffffffffULL};
  MaskingContext ctx{0, 1, &secrets};
  EXPECT_EQ(mask_update(enc, ctx), enc);
}

TEST(Masking, TwoClientMasksCancelExactly) {
  const PairwiseSecrets secrets = PairwiseSecrets::deal(2, 11);
  Rng rng(3);
  for (std::uint64_t round = 1; round <= 5; ++round) {
    std::vector<std::uint64_t> e0(16), e1(16);
    for (auto& x : e0) x = rng.next_u64();
    for (auto& x : e1) x = rng.next_u64();
    const auto m0 = mask_update(e0, MaskingContext{0, round, &secrets});
    const auto m1 = mask_update(e1, MaskingContext{1, round, &secrets});
    EXPECT_NE(m0, e0);  // the mask actually hides the payload
    const auto sum = unmask_sum({m0, m1});
    for (std::size_t i = 0; i < sum.size(); ++i) EXPECT_EQ(sum[i], e0[i] + e1[i]);
  }
}

TEST(Masking, TenClientRingSumRecoversPlainSum) {
  const std::size_t k = 10, dim = 64;
  const PairwiseSecrets secrets = PairwiseSecrets::deal(k, 99);
  Rng rng(4);
  std::vector<std::vector<std::uint64_t>> enc(k, std::vector<std::uint64_t>(dim));
  std::vector<std::vector<std::uint64_t>> masked;
  for (std::size_t i = 0; i < k; ++i) {
    for (auto& x : enc[i]) x = rng.next_u64();
    masked.push_back(mask_update(enc[i], MaskingContext{i, 1, &secrets}));
  }
  const auto got = unmask_sum(masked);
  const auto want = unmask_sum(enc);
  EXPECT_EQ(got, want);
}

TEST(Masking, DecodedWeightedFixtureMatchesOracle) {
  // End-to-end fixture at the codec level: encode real vectors, mask, ring
  // sum, decode; compare against the plain double sum.
  const std::size_t k = 10, dim = 32;
  const FixedPointCodec codec;
  const PairwiseSecrets secrets = PairwiseSecrets::deal(k, 5);
  Rng rng(6);
  std::vector<double> expected(dim, 0.0);
  std::vector<std::vector<std::uint64_t>> masked;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> x(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      x[c] = 100.0 * (rng.uniform() - 0.5);
      expected[c] += x[c];
    }
    masked.push_back(
        mask_update(ring_embed(encode_fixed(x, codec)), MaskingContext{i, 1, &secrets}));
  }
  const auto decoded = decode_ring_sum(unmask_sum(masked), codec);
  const double tol = static_cast<double>(k) / codec.scale();
  for (std::size_t c = 0; c < dim; ++c) EXPECT_NEAR(decoded[c], expected[c], tol);
}

TEST(Masking, KnownVectorsSumExactly) {
  const FixedPointCodec codec;
  const PairwiseSecrets secrets = PairwiseSecrets::deal(2, 21);
  const auto m0 = mask_update(ring_embed(encode_fixed(std::vector<double>{1.0, 1.0}, codec)),
                              MaskingContext{0, 1, &secrets});
  const auto m1 = mask_update(ring_embed(encode_fixed(std::vector<double>{3.0, 3.0}, codec)),
                              MaskingContext{1, 1, &secrets});
  const auto sum = decode_ring_sum(unmask_sum({m0, m1}), codec);
  EXPECT_DOUBLE_EQ(sum[0], 4.0);
  EXPECT_DOUBLE_EQ(sum[1], 4.0);
}

TEST(Masking, ZeroInputsStayZeroAfterCancellation) {
  const std::size_t k = 6, dim = 32;
  const PairwiseSecrets secrets = PairwiseSecrets::deal(k, 77);
  for (std::uint64_t round = 1; round <= 3; ++round) {
    std::vector<std::vector<std::uint64_t>> masked;
    for (std::size_t i = 0; i < k; ++i)
      masked.push_back(mask_update(std::vector<std::uint64_t>(dim, 0),
                                   MaskingContext{i, round, &secrets}));
    const auto sum = unmask_sum(masked);
    for (auto x : sum) EXPECT_EQ(x, 0u);
  }
}

TEST(Masking, StreamsVaryByRound) {
  const PairwiseSecrets secrets = PairwiseSecrets::deal(2, 1);
  const std::vector<std::uint64_t> zero(8, 0);
  const auto r1 = mask_update(zero, MaskingContext{0, 1, &secrets});
  const auto r2 = mask_update(zero, MaskingContext{0, 2, &secrets});
  EXPECT_NE(r1, r2);
  // Same round twice reproduces the identical mask.
  EXPECT_EQ(r1, mask_update(zero, MaskingContext{0, 1, &secrets}));
}

TEST(Masking, MaskBytesLookUniform) {
  // Top 4 bits of one client's mask stream over 4096 rounds, 16 bins.
  // Chi-square critical value at p = 0.01 with 15 degrees of freedom.
  const PairwiseSecrets secrets = PairwiseSecrets::deal(2, 1234);
  const std::vector<std::uint64_t> zero(1, 0);
  std::vector<std::size_t> bins(16, 0);
  const std::size_t draws = 4096;
  for (std::uint64_t round = 1; round <= draws; ++round) {
    const auto m = mask_update(zero, MaskingContext{0, round, &secrets});
    ++bins[m[0] >> 60];
  }
  const double expected = static_cast<double>(draws) / 16.0;
  double chi2 = 0.0;
  for (auto b : bins) {
    const double d = static_cast<double>(b) - expected;
    chi2 += d * d / expected;
  }
  EXPECT_LT(chi2, 30.578) << "chi-square " << chi2;
}

TEST(Masking, ErrorsOnBadContext) {
  const PairwiseSecrets secrets = PairwiseSecrets::deal(3, 9);
  const std::vector<std::uint64_t> enc(4, 0);
  EXPECT_THROW(mask_update(enc, MaskingContext{3, 1, &secrets}), std::invalid_argument);
  EXPECT_THROW(mask_update(enc, MaskingContext{0, 1, nullptr}), std::invalid_argument);
  EXPECT_THROW(unmask_sum({}), std::invalid_argument);
  EXPECT_THROW(unmask_sum({{1, 2}, {1}}), std::invalid_argument);
}

}  // namespace
}  // namespace fedgat
