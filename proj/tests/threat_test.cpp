#include "fedgat/threat.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fedgat/graph.hpp"
#include "fedgat/rng.hpp"
#include "test_util.hpp"

namespace fedgat {
namespace {

TEST(MaliciousClients, SeededFloorSelection) {
  AttackSpec spec;
  spec.malicious_fraction = 0.2;
  spec.seed = 42;
  const auto chosen = malicious_clients(10, spec);
  EXPECT_EQ(chosen.size(), 2u);  // floor(0.2 * 10)
  EXPECT_TRUE(std::is_sorted(chosen.begin(), chosen.end()));
  EXPECT_EQ(chosen, malicious_clients(10, spec));

  spec.malicious_fraction = 0.0;
  EXPECT_TRUE(malicious_clients(10, spec).empty());
  spec.malicious_fraction = 0.99;
  EXPECT_EQ(malicious_clients(10, spec).size(), 9u);

  spec.malicious_fraction = 1.0;
  EXPECT_THROW(malicious_clients(10, spec), std::invalid_argument);
}

TEST(MaliciousClients, SeedChangesTheDraw) {
  AttackSpec a, b;
  a.malicious_fraction = b.malicious_fraction = 0.5;
  a.seed = 1;
  b.seed = 2;
  EXPECT_NE(malicious_clients(20, a), malicious_clients(20, b));
}

TEST(LabelFlip, FlipsExactlyTheRequestedShare) {
  Rng rng(8);
  const Graph g = testing::random_graph(rng, 40, 0.2, 3, 2);
  AttackSpec spec;
  spec.flip_fraction = 0.3;
  spec.seed = 5;
  const Graph flipped = apply_label_flip(g, spec, 2);
  std::size_t changed = 0;
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    if (g.labels[v] != flipped.labels[v]) {
      ++changed;
      EXPECT_TRUE(g.train_mask[v]) << "test label touched at node " << v;
      EXPECT_EQ(flipped.labels[v], (g.labels[v] + 1) % 2);
    }
  }
  EXPECT_EQ(changed, static_cast<std::size_t>(
                         std::ceil(0.3 * static_cast<double>(g.count_train()))));
  // Features, structure, masks untouched.
  EXPECT_EQ(flipped.features.data, g.features.data);
  EXPECT_EQ(flipped.csr_targets, g.csr_targets);
  EXPECT_EQ(flipped.train_mask, g.train_mask);
}

TEST(LabelFlip, ZeroFractionIsIdentity) {
  Rng rng(9);
  const Graph g = testing::random_graph(rng, 20, 0.2, 3, 2);
  AttackSpec spec;
  spec.flip_fraction = 0.0;
  EXPECT_EQ(apply_label_flip(g, spec, 2).labels, g.labels);
}

TEST(LabelFlip, BinaryFullFlipIsAnInvolution) {
  Rng rng(10);
  const Graph g = testing::random_graph(rng, 25, 0.2, 3, 2);
  AttackSpec spec;
  spec.flip_fraction = 1.0;
  spec.seed = 3;
  const Graph once = apply_label_flip(g, spec, 2);
  EXPECT_NE(once.labels, g.labels);
  const Graph twice = apply_label_flip(once, spec, 2);
  EXPECT_EQ(twice.labels, g.labels);
}

TEST(PoisonGradient, GradScaleMultipliesByGamma) {
  AttackSpec spec;
  spec.kind = AttackKind::kGradScale;
  spec.scale = -10.0;
  Rng rng(1);
  const auto out = poison_gradient(std::vector<double>{1.0, 2.0, -0.5}, spec, rng);
  EXPECT_EQ(out, (std::vector<double>{-10.0, -20.0, 5.0}));
}

TEST(PoisonGradient, GradSignIsAnInvolution) {
  AttackSpec spec;
  spec.kind = AttackKind::kGradSign;
  Rng rng(1);
  const std::vector<double> g{1.0, -2.0, 0.0};
  const auto once = poison_gradient(g, spec, rng);
  EXPECT_EQ(once, (std::vector<double>{-1.0, 2.0, 0.0}));
  EXPECT_EQ(poison_gradient(once, spec, rng), g);
}

TEST(PoisonGradient, GaussBlastScalesWithGradientMagnitude) {
  AttackSpec spec;
  spec.kind = AttackKind::kGaussBlast;
  const std::vector<double> g{1.0, -1.0, 1.0, -1.0};
  Rng r1(7), r2(7), r3(8);
  const auto a = poison_gradient(g, spec, r1);
  const auto b = poison_gradient(g, spec, r2);
  const auto c = poison_gradient(g, spec, r3);
  EXPECT_EQ(a, b);  // deterministic per stream
  EXPECT_NE(a, c);
  EXPECT_NE(a, g);
  // Zero gradient gives zero blast scale: unchanged.
  Rng r4(7);
  const std::vector<double> zeros(4, 0.0);
  EXPECT_EQ(poison_gradient(zeros, spec, r4), zeros);
}

TEST(PoisonGradient, LabelFlipKindLeavesUpdatesAlone) {
  AttackSpec spec;
  spec.kind = AttackKind::kLabelFlip;
  Rng rng(2);
  const std::vector<double> g{3.0, -4.0};
  EXPECT_EQ(poison_gradient(g, spec, rng), g);
}

TEST(TrimmedMean, DropsExtremesPerCoordinate) {
  const std::vector<std::vector<double>> updates{{1.0}, {2.0}, {100.0}};
  const std::vector<double> weights{1.0, 1.0, 1.0};
  const auto res = robust_aggregate(updates, weights, RobustMode::kTrimmedMean, 1);
  EXPECT_DOUBLE_EQ(res.aggregate[0], 2.0);
  EXPECT_FALSE(res.all_filtered);
}

TEST(TrimmedMean, OperatesCoordinatewise) {
  // Different clients are extreme in different coordinates.
  const std::vector<std::vector<double>> updates{{0.0, 9.0}, {1.0, 1.0}, {9.0, 0.0}, {2.0, 2.0}, {3.0, 3.0}};
  const std::vector<double> weights(5, 1.0);
  const auto res = robust_aggregate(updates, weights, RobustMode::kTrimmedMean, 1);
  EXPECT_DOUBLE_EQ(res.aggregate[0], (1.0 + 2.0 + 3.0) / 3.0);
  EXPECT_DOUBLE_EQ(res.aggregate[1], (1.0 + 2.0 + 3.0) / 3.0);
}

TEST(TrimmedMean, TrimZeroIsTheUnweightedMean) {
  Rng rng(3);
  std::vector<std::vector<double>> updates(4, std::vector<double>(6));
  for (auto& u : updates)
    for (auto& x : u) x = rng.gaussian();
  const std::vector<double> weights{5.0, 1.0, 1.0, 1.0};  // ignored by trimmed mean
  const auto res = robust_aggregate(updates, weights, RobustMode::kTrimmedMean, 0);
  for (std::size_t c = 0; c < 6; ++c) {
    double mean = 0.0;
    for (const auto& u : updates) mean += u[c];
    mean /= 4.0;
    EXPECT_NEAR(res.aggregate[c], mean, 1e-12);
  }
}

TEST(TrimmedMean, PermutationInvariant) {
  Rng rng(4);
  std::vector<std::vector<double>> updates(7, std::vector<double>(5));
  for (auto& u : updates)
    for (auto& x : u) x = 10.0 * rng.gaussian();
  const std::vector<double> weights(7, 1.0);
  const auto base = robust_aggregate(updates, weights, RobustMode::kTrimmedMean, 2);
  std::vector<std::vector<double>> shuffled = updates;
  rng.shuffle(shuffled);
  const auto perm = robust_aggregate(shuffled, weights, RobustMode::kTrimmedMean, 2);
  for (std::size_t c = 0; c < 5; ++c) EXPECT_DOUBLE_EQ(perm.aggregate[c], base.aggregate[c]);
}

TEST(TrimmedMean, BreakdownBoundHolds) {
  // With at most trim_k adversarial updates of arbitrary magnitude, every
  // output coordinate stays inside the honest values' range.
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 10, trim_k = 2, dim = 8;
    std::vector<std::vector<double>> updates;
    std::vector<std::vector<double>> honest;
    for (std::size_t i = 0; i < k - trim_k; ++i) {
      std::vector<double> u(dim);
      for (auto& x : u) x = rng.gaussian();
      honest.push_back(u);
      updates.push_back(std::move(u));
    }
    for (std::size_t i = 0; i < trim_k; ++i) {
      std::vector<double> u(dim);
      for (auto& x : u) x = (rng.uniform() < 0.5 ? -1.0 : 1.0) * 1e6 * (1.0 + rng.uniform());
      updates.push_back(std::move(u));
    }
    rng.shuffle(updates);
    const auto res =
        robust_aggregate(updates, std::vector<double>(k, 1.0), RobustMode::kTrimmedMean, trim_k);
    for (std::size_t c = 0; c < dim; ++c) {
      double lo = honest[0][c], hi = honest[0][c];
      for (const auto& h : honest) {
        lo = std::min(lo, h[c]);
        hi = std::max(hi, h[c]);
      }
      EXPECT_GE(res.aggregate[c], lo - 1e-9);
      EXPECT_LE(res.aggregate[c], hi + 1e-9);
    }
  }
}

TEST(NormFilter, DropsInflatedUpdatesAndRecoversHonestMean) {
  // 8 honest unit-scale updates, 2 poisoned at 10x scale: the poisoned pair
  // exceeds 3x the median norm and the result is the honest weighted mean.
  Rng rng(6);
  const std::size_t dim = 12;
  std::vector<std::vector<double>> updates;
  std::vector<double> weights;
  std::vector<double> expected(dim, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    std::vector<double> u(dim);
    for (auto& x : u) x = rng.gaussian();
    const double n = norm2(u);
    for (auto& x : u) x /= n;  // unit norm
    const double w = 1.0 + static_cast<double>(i);
    if (i == 2 || i == 6) {
      for (auto& x : u) x *= -10.0;
    } else {
      for (std::size_t c = 0; c < dim; ++c) expected[c] += w * u[c];
      wsum += w;
    }
    weights.push_back(w);
    updates.push_back(std::move(u));
  }
  for (auto& x : expected) x /= wsum;
  const auto res = robust_aggregate(updates, weights, RobustMode::kNormFilter, 0);
  EXPECT_EQ(res.dropped, (std::vector<std::size_t>{2, 6}));
  EXPECT_FALSE(res.all_filtered);
  for (std::size_t c = 0; c < dim; ++c) EXPECT_NEAR(res.aggregate[c], expected[c], 1e-9);
}

TEST(NormFilter, KeepsEveryoneWhenNormsAgree) {
  std::vector<std::vector<double>> updates{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
  const std::vector<double> weights{1.0, 2.0, 1.0};
  const auto res = robust_aggregate(updates, weights, RobustMode::kNormFilter, 0);
  EXPECT_TRUE(res.dropped.empty());
  EXPECT_NEAR(res.aggregate[0], (1.0 - 1.0) / 4.0, 1e-15);
  EXPECT_NEAR(res.aggregate[1], 2.0 / 4.0, 1e-15);
}

TEST(RobustAggregate, InputValidation) {
  const std::vector<std::vector<double>> updates{{1.0}, {2.0}, {3.0}};
  const std::vector<double> weights{1.0, 1.0, 1.0};
  EXPECT_THROW(robust_aggregate({}, weights, RobustMode::kTrimmedMean, 0), std::invalid_argument);
  EXPECT_THROW(robust_aggregate(updates, weights, RobustMode::kTrimmedMean, 2),
               std::invalid_argument);  // 2*trim_k >= K
  EXPECT_THROW(robust_aggregate(updates, std::vector<double>{1.0}, RobustMode::kNormFilter, 0),
               std::invalid_argument);
  EXPECT_THROW(robust_aggregate({{1.0}, {2.0, 3.0}}, weights, RobustMode::kNormFilter, 0),
               std::invalid_argument);
  EXPECT_THROW(robust_aggregate(updates, weights, RobustMode::kOff, 0), std::invalid_argument);
}

TEST(EnumStrings, RoundTrip) {
  for (AttackKind k : {AttackKind::kLabelFlip, AttackKind::kGradScale, AttackKind::kGradSign,
                       AttackKind::kGaussBlast})
    EXPECT_EQ(attack_kind_from_string(to_string(k)), k);
  for (RobustMode m : {RobustMode::kOff, RobustMode::kTrimmedMean, RobustMode::kNormFilter})
    EXPECT_EQ(robust_mode_from_string(to_string(m)), m);
  EXPECT_THROW(attack_kind_from_string("nope"), std::invalid_argument);
  EXPECT_THROW(robust_mode_from_string("nope"), std::invalid_argument);
}

}  // namespace
}  // namespace fedgat
