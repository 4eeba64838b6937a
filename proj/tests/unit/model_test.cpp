#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "diffcone/model.hpp"
#include "support.hpp"

namespace diffcone {
namespace {

// Eight items over three levels sized (3, 2, 3).
struct ThreeLevelFixture {
  EmbeddingSet<double> embeddings;
  LabeledDataset dataset;
};

ThreeLevelFixture three_level_fixture() {
  std::mt19937_64 rng(7);
  auto embeddings = testing::random_unit_embeddings(8, 3, rng);
  const int levels[] = {0, 0, 0, 1, 1, 2, 2, 2};
  std::vector<LabeledDataset::Label> labels;
  // Labels deliberately in a different order than the embeddings.
  for (int i = 7; i >= 0; --i) labels.push_back({embeddings.id(i), levels[i]});
  return {std::move(embeddings), LabeledDataset({"Lv1", "Lv2", "Lv3"}, labels)};
}

// Enumerates every ordered item pair and keeps those the predicate accepts.
template <typename Accept>
std::vector<OrderPair> enumerate_pairs(const ThreeLevelFixture& f, Accept accept) {
  std::vector<OrderPair> out;
  for (Index i = 0; i < f.embeddings.size(); ++i) {
    for (Index j = 0; j < f.embeddings.size(); ++j) {
      const int li = *f.dataset.level_of(f.embeddings.id(i));
      const int lj = *f.dataset.level_of(f.embeddings.id(j));
      if (accept(li, lj)) out.push_back({i, j});
    }
  }
  return out;
}

TEST(EmbeddingSet, RenormalizesToUnitNorm) {
  Eigen::MatrixXd x(2, 2);
  x << 3, 0, 4, 2;
  EmbeddingSet<double> e({"a", "b"}, x, NormPolicy::kRenormalize);
  EXPECT_NEAR(e.vector(0).norm(), 1.0, 1e-15);
  EXPECT_NEAR(e.vector(1).norm(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(e.vector(0)[0], 0.6);
}

TEST(EmbeddingSet, AssertUnitRejectsNonUnit) {
  Eigen::MatrixXd x(2, 1);
  x << 2, 0;
  try {
    EmbeddingSet<double>({"a"}, x, NormPolicy::kAssertUnit);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNormViolation);
  }
}

TEST(EmbeddingSet, RejectsDuplicateAndEmptyIds) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
  try {
    EmbeddingSet<double>({"a", "a"}, x, NormPolicy::kAssertUnit);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateId);
  }
  EXPECT_THROW(EmbeddingSet<double>({"a", ""}, x, NormPolicy::kAssertUnit), Error);
}

TEST(EmbeddingSet, ZeroVectorCannotBeNormalized) {
  try {
    EmbeddingSet<double>({"z"}, Eigen::MatrixXd::Zero(3, 1), NormPolicy::kRenormalize);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVector);
  }
}

TEST(EmbeddingSet, FloatScalar) {
  Eigen::MatrixXf x(2, 1);
  x << 1.0f, 1.0f;
  EmbeddingSet<float> e({"a"}, x, NormPolicy::kRenormalize);
  EXPECT_NEAR(e.vector(0).norm(), 1.0f, 1e-6f);
}

TEST(BuildConstraints, AllCrossLevelCountsFigureExample) {
  const auto f = three_level_fixture();
  const auto c = build_constraints(f.dataset, f.embeddings, AllCrossLevel{});
  const auto expected = enumerate_pairs(f, [](int a, int b) { return a < b; });
  EXPECT_EQ(expected.size(), 21u);  // 3*2 + 3*3 + 2*3
  EXPECT_EQ(c.pairs, expected);     // enumeration is already (i, j)-sorted
}

TEST(BuildConstraints, AdjacentLevelsCountsFigureExample) {
  const auto f = three_level_fixture();
  const auto c = build_constraints(f.dataset, f.embeddings, AdjacentLevels{});
  const auto expected = enumerate_pairs(f, [](int a, int b) { return b == a + 1; });
  EXPECT_EQ(expected.size(), 12u);  // 3*2 + 2*3
  EXPECT_EQ(c.pairs, expected);
}

TEST(BuildConstraints, AdjacentIsSubsetOfAllCrossLevel) {
  const auto f = three_level_fixture();
  const auto all = build_constraints(f.dataset, f.embeddings, AllCrossLevel{});
  const auto adjacent = build_constraints(f.dataset, f.embeddings, AdjacentLevels{});
  EXPECT_TRUE(std::includes(all.pairs.begin(), all.pairs.end(), adjacent.pairs.begin(), adjacent.pairs.end()));
}

TEST(BuildConstraints, AdjacencySkipsUnusedLevels) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
  EmbeddingSet<double> e({"a", "b"}, x, NormPolicy::kAssertUnit);
  LabeledDataset d({"A1", "A2", "B1"}, {{"a", 0}, {"b", 2}});
  EXPECT_EQ(build_constraints(d, e, AdjacentLevels{}).size(), 1u);
}

TEST(BuildConstraints, LevelPairAndPerItem) {
  const auto f = three_level_fixture();
  const auto pair = build_constraints(f.dataset, f.embeddings, LevelPair{0, 2});
  EXPECT_EQ(pair.pairs, enumerate_pairs(f, [](int a, int b) { return a == 0 && b == 2; }));

  const std::string anchor = f.embeddings.id(3);  // level 1
  const auto item = build_constraints(f.dataset, f.embeddings, PerItem{anchor});
  ASSERT_EQ(item.size(), 6u);
  for (const auto& p : item.pairs) {
    EXPECT_TRUE(p.easier == 3 || p.harder == 3);
    EXPECT_NE(p.easier, p.harder);
  }
  EXPECT_TRUE(std::is_sorted(item.pairs.begin(), item.pairs.end()));
}

TEST(BuildConstraints, MinimalTwoItems) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
  EmbeddingSet<double> e({"easy", "hard"}, x, NormPolicy::kAssertUnit);
  LabeledDataset d({"A", "B"}, {{"hard", 1}, {"easy", 0}});
  const auto c = build_constraints(d, e, AllCrossLevel{});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.pairs[0], (OrderPair{0, 1}));
}

TEST(BuildConstraints, Errors) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(2, 2);
  EmbeddingSet<double> e({"a", "b"}, x, NormPolicy::kAssertUnit);
  auto code_of = [&](const LabeledDataset& d, const ConstraintMode& mode) {
    try {
      build_constraints(d, e, mode);
    } catch (const Error& err) {
      return err.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code_of(LabeledDataset({"A", "B"}, {{"a", 0}, {"c", 1}}), AllCrossLevel{}), ErrorCode::kUnknownId);
  EXPECT_EQ(code_of(LabeledDataset({"A", "B"}, {{"a", 0}, {"b", 0}}), AllCrossLevel{}), ErrorCode::kSingleLevel);
  EXPECT_EQ(code_of(LabeledDataset({"A", "B", "C"}, {{"a", 0}, {"b", 2}}), LevelPair{0, 1}),
            ErrorCode::kEmptyConstraintSet);
  EXPECT_EQ(code_of(LabeledDataset({"A", "B"}, {{"a", 0}, {"b", 1}}), LevelPair{0, 5}), ErrorCode::kUnknownLevel);
}

TEST(BuildConstraints, PropertiesOnRandomDatasets) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 5 + static_cast<Index>(rng() % 40);
    const int levels = 2 + static_cast<int>(rng() % 5);
    const auto e = testing::random_unit_embeddings(n, 4, rng);
    std::vector<std::string> names;
    for (int l = 0; l < levels; ++l) names.push_back("L" + std::to_string(l));
    std::vector<LabeledDataset::Label> labels;
    std::vector<std::size_t> sizes(static_cast<std::size_t>(levels), 0);
    for (Index i = 0; i < n; ++i) {
      const int level = static_cast<int>(rng() % static_cast<std::uint64_t>(levels));
      labels.push_back({e.id(i), level});
      ++sizes[static_cast<std::size_t>(level)];
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    const LabeledDataset d(names, labels);
    if (d.present_levels().size() < 2) continue;

    const auto c = build_constraints(d, e, AllCrossLevel{});
    std::size_t expected = 0;
    for (int a = 0; a < levels; ++a) {
      for (int b = a + 1; b < levels; ++b) expected += sizes[a] * sizes[b];
    }
    EXPECT_EQ(c.size(), expected);
    for (const auto& p : c.pairs) {
      EXPECT_LT(*d.level_of(e.id(p.easier)), *d.level_of(e.id(p.harder)));
    }
    EXPECT_TRUE(validate(c, e).clean());

    // Same inputs, same pair list.
    EXPECT_EQ(build_constraints(d, e, AllCrossLevel{}).pairs, c.pairs);
  }
}

TEST(Validate, FlagsCycle) {
  ConstraintSet c{{{0, 1}, {1, 0}}};
  const auto report = validate(c, 2);
  EXPECT_TRUE(report.has_cycle());
  EXPECT_EQ(report.cycle.size(), 2u);
  EXPECT_FALSE(report.clean());
}

TEST(Validate, ChainIsClean) {
  ConstraintSet c{{{0, 1}, {1, 2}}};
  EXPECT_TRUE(validate(c, 3).clean());
}

TEST(Validate, FlagsDuplicate) {
  ConstraintSet c{{{0, 1}, {0, 1}}};
  const auto report = validate(c, 2);
  ASSERT_EQ(report.duplicates.size(), 1u);
  EXPECT_EQ(report.duplicates[0], 1u);
  EXPECT_FALSE(report.has_cycle());
}

TEST(Validate, FlagsBoundsAndSelfLoops) {
  ConstraintSet c{{{0, 5}, {1, 1}, {-1, 0}}};
  const auto report = validate(c, 2);
  EXPECT_EQ(report.out_of_bounds.size(), 2u);
  EXPECT_EQ(report.self_loops.size(), 1u);
}

TEST(Validate, LongerCycle) {
  ConstraintSet c{{{0, 1}, {1, 2}, {2, 3}, {3, 1}, {4, 0}}};
  const auto report = validate(c, 5);
  ASSERT_TRUE(report.has_cycle());
  EXPECT_EQ(report.cycle, (std::vector<Index>{1, 2, 3}));
}

}  // namespace
}  // namespace diffcone
