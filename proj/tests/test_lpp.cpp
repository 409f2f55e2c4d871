#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <utility>

#include "dtasep/lpp.hpp"
#include "dtasep/verify/brute_force_lpp.hpp"

using namespace dtasep;
using namespace dtasep::lpp;

namespace {

// Weights looked up from a table; missing cells weigh `fallback`.
struct InjectedWeights {
  std::map<std::pair<std::int64_t, std::int64_t>, double> w;
  double fallback = 0.0;
  double operator()(std::int64_t i, std::int64_t j) const {
    auto it = w.find({i, j});
    return it == w.end() ? fallback : it->second;
  }
};

InjectedWeights small_example() {
  InjectedWeights y;
  y.w = {{{0, 0}, 1.0}, {{1, 0}, 2.0}, {{2, 0}, 5.0}, {{0, 1}, 3.0}, {{1, 1}, 1.0}, {{-1, 1}, 0.5}};
  return y;
}

struct RandomWeights {
  std::uint64_t seed;
  double operator()(std::int64_t i, std::int64_t j) const {
    return exponential_from_uniform(cell_uniform(seed, stream::weight_y, i, j), 1.0);
  }
};

}  // namespace

TEST(WedgePoint, Membership) {
  EXPECT_TRUE(in_wedge({0, 0}));
  EXPECT_TRUE(in_wedge({-3, 3}));
  EXPECT_FALSE(in_wedge({-4, 3}));
  EXPECT_FALSE(in_wedge({1, -1}));
}

TEST(SampleWeight, ExponentialMean) {
  const int n = 100000;
  for (double rate : {0.5, 1.0}) {
    const auto env = sample_environment(PointMass{rate}, 1, 0, n - 1);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += sample_weight(env, 17, {i, 0});
    const double mean = 1.0 / rate;
    EXPECT_NEAR(s / n, mean, 3.0 * mean / std::sqrt(n));
  }
}

TEST(SampleWeight, DeterministicAndWedgeChecked) {
  const auto env = sample_environment(Uniform{0.5, 1.0}, 3, -5, 5);
  EXPECT_EQ(sample_weight(env, 8, {2, 3}), sample_weight(env, 8, {2, 3}));
  EXPECT_NE(sample_weight(env, 8, {2, 3}), sample_weight(env, 9, {2, 3}));
  EXPECT_THROW(sample_weight(env, 8, {-4, 3}), DomainError);
}

TEST(PassageTable, UniquePathAlongRowZero) {
  const auto y = small_example();
  const auto t = passage_table(y, {1, 0});
  EXPECT_DOUBLE_EQ(t.at({1, 0}), 1.0 + 2.0);
}

TEST(PassageTable, ColumnZeroRowOne) {
  // Two paths reach (0, 1): through (1, 0) and along the wedge edge through
  // (-1, 1). With Y(-1,1) = 0.5 < Y(1,0) = 2 the first one wins.
  auto y = small_example();
  EXPECT_DOUBLE_EQ(passage_table(y, {0, 1}).at({0, 1}), 1.0 + 2.0 + 3.0);
  y.w[{-1, 1}] = 4.0;
  EXPECT_DOUBLE_EQ(passage_table(y, {0, 1}).at({0, 1}), 1.0 + 4.0 + 3.0);
}

TEST(PassageTable, SmallExampleMatchesEnumeration) {
  const auto y = small_example();
  const auto t = passage_table(y, {1, 1});
  EXPECT_DOUBLE_EQ(t.at({1, 1}), 9.0);
  const auto bf = oracle::brute_force(y, {1, 1});
  EXPECT_EQ(bf.paths, 3u);
  EXPECT_DOUBLE_EQ(bf.best, 9.0);
}

TEST(PassageTable, ResourceBudget) {
  const auto y = small_example();
  EXPECT_THROW(passage_table(y, {100, 100}, 1000), ResourceError);
  EXPECT_THROW(passage_table(y, {-2, 1}), DomainError);
}

TEST(PassageTable, StreamingAgreesWithFullTable) {
  const RandomWeights y{5};
  for (WedgePoint p : {WedgePoint{0, 0}, WedgePoint{7, 3}, WedgePoint{-4, 9}, WedgePoint{20, 0}, WedgePoint{-6, 6}})
    EXPECT_EQ(last_passage_time(y, p), passage_table(y, p).at(p));
}

TEST(PassageTable, EnvironmentOverloadChecksCoverage) {
  const auto env = sample_environment(PointMass{1.0}, 1, 0, 10);
  EXPECT_THROW(passage_table(env, 2, {3, 2}), DomainError);  // needs column -2
  const auto wide = sample_environment(PointMass{1.0}, 1, -2, 5);
  EXPECT_NO_THROW(passage_table(wide, 2, {3, 2}));
}

// Exhaustive check: every target with at most 12 steps, random weights.
TEST(PassageTable, AgreesWithBruteForceOnSmallTargets) {
  std::mt19937_64 gen(2718);
  std::exponential_distribution<double> expo(1.0);
  int checked = 0;
  for (std::int64_t j = 0; j <= 6; ++j) {
    for (std::int64_t i = -j; i + 2 * j <= 12; ++i) {
      InjectedWeights y;
      for (std::int64_t jj = 0; jj <= j; ++jj)
        for (std::int64_t d = 0; d <= i + j; ++d) y.w[{d - jj, jj}] = expo(gen);
      const auto bf = oracle::brute_force(y, {i, j});
      EXPECT_EQ(passage_table(y, {i, j}).at({i, j}), bf.best) << to_string({i, j});
      ++checked;
    }
  }
  EXPECT_GT(checked, 40);
}

TEST(PassageTable, MonotoneInEachWeight) {
  const WedgePoint target{4, 3};
  InjectedWeights base;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::int64_t j = 0; j <= 3; ++j)
    for (std::int64_t d = 0; d <= 7; ++d) base.w[{d - j, j}] = u(gen);
  const auto before = passage_table(base, target);
  for (const auto& [cell, value] : base.w) {
    auto bumped = base;
    bumped.w[cell] = value + 0.75;
    const auto after = passage_table(bumped, target);
    for (std::int64_t j = 0; j <= 3; ++j)
      for (std::int64_t d = 0; d <= 7; ++d) ASSERT_GE(after({d - j, j}), before({d - j, j}));
  }
}

TEST(PassageTable, NondecreasingAlongPaths) {
  const RandomWeights y{77};
  const WedgePoint target{10, 8};
  const auto t = passage_table(y, target);
  const auto path = backtrack_path(t, target);
  for (std::size_t k = 1; k < path.vertices.size(); ++k) EXPECT_GE(t(path.vertices[k]), t(path.vertices[k - 1]));
}

TEST(BacktrackPath, PicksTheHeavierBranch) {
  const auto y = small_example();
  const auto t = passage_table(y, {1, 1});
  const auto path = backtrack_path(t, {1, 1});
  const std::vector<WedgePoint> expect{{0, 0}, {1, 0}, {2, 0}, {1, 1}};
  EXPECT_EQ(path.vertices, expect);
  EXPECT_DOUBLE_EQ(path_weight(path, y), 9.0);
}

TEST(BacktrackPath, TiesPreferEast) {
  InjectedWeights ones;
  ones.fallback = 1.0;
  const auto t = passage_table(ones, {1, 1});
  const auto path = backtrack_path(t, {1, 1});
  // T(0,1) = T(2,0) = 3; the east predecessor of (1,1) is (0,1).
  EXPECT_EQ(path.vertices[path.vertices.size() - 2], (WedgePoint{0, 1}));
}

TEST(BacktrackPath, RowZeroIsAllEast) {
  const RandomWeights y{3};
  const auto t = passage_table(y, {6, 0});
  const auto path = backtrack_path(t, {6, 0});
  ASSERT_EQ(path.vertices.size(), 7u);
  for (std::int64_t k = 0; k <= 6; ++k) EXPECT_EQ(path.vertices[k], (WedgePoint{k, 0}));
}

TEST(BacktrackPath, WeightEqualsPassageTimeAndIsAnArgmax) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const RandomWeights y{seed};
    const WedgePoint target{static_cast<std::int64_t>(seed % 5) - 2, 4};
    const auto t = passage_table(y, target);
    const auto path = backtrack_path(t, target);
    validate_path(path);
    EXPECT_EQ(path.vertices.front(), (WedgePoint{0, 0}));
    EXPECT_EQ(path.vertices.back(), target);
    EXPECT_NEAR(path_weight(path, y), t.at(target), 1e-12);
    EXPECT_NEAR(oracle::brute_force(y, target).best, t.at(target), 1e-12);
  }
}

TEST(BacktrackPath, TargetOutsideTable) {
  const RandomWeights y{3};
  const auto t = passage_table(y, {2, 2});
  EXPECT_THROW(backtrack_path(t, {3, 2}), DomainError);
}

TEST(ColumnCoverage, AllEastPath) {
  LatticePath p;
  for (std::int64_t k = 0; k <= 5; ++k) p.vertices.push_back({k, 0});
  EXPECT_EQ(column_coverage(p), (std::vector<std::int64_t>{0, 1, 2, 3, 4, 5}));
}

TEST(ColumnCoverage, PureNorthwestPath) {
  LatticePath p{{{0, 0}, {-1, 1}, {-2, 2}, {-3, 3}}};
  const auto cols = column_coverage(p);
  EXPECT_EQ(cols, (std::vector<std::int64_t>{-3, -2, -1, 0}));
}

TEST(ColumnCoverage, EveryPathToTwoThreeCoversZeroToTwo) {
  int paths = 0;
  oracle::enumerate_paths({2, 3}, [&](const std::vector<WedgePoint>& v) {
    ++paths;
    const auto cols = column_coverage(LatticePath{v});
    const std::set<std::int64_t> s(cols.begin(), cols.end());
    for (std::int64_t c = 0; c <= 2; ++c) EXPECT_TRUE(s.count(c));
  });
  EXPECT_GT(paths, 10);
}

TEST(ColumnCoverage, RejectsIllegalSteps) {
  EXPECT_THROW(column_coverage(LatticePath{{{0, 0}, {0, 1}}}), PathError);
  EXPECT_THROW(column_coverage(LatticePath{{{0, 0}, {2, 0}}}), PathError);
  EXPECT_THROW(column_coverage(LatticePath{}), PathError);
  EXPECT_THROW(column_coverage(LatticePath{{{0, 0}, {-1, 1}, {-2, 1}}}), PathError);
}

TEST(ColumnCoverage, HoldsForBacktrackedPaths) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RandomWeights y{seed + 100};
    const WedgePoint target{static_cast<std::int64_t>(seed % 7), 5};
    const auto cols = column_coverage(backtrack_path(passage_table(y, target), target));
    for (std::int64_t c = 0; c <= target.i; ++c)
      EXPECT_TRUE(std::binary_search(cols.begin(), cols.end(), c));
  }
}

TEST(TauEstimate, HomogeneousLadderBelowClosedForm) {
  const auto est = tau_estimate(PointMass{1.0}, 0.0, 1.0, {50, 100, 200}, 24);
  ASSERT_EQ(est.per_size.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_LE(est.per_size[k].mean, 4.0 + 3.0 * est.per_size[k].sem);
    if (k > 0) {
      EXPECT_GE(est.per_size[k].mean, est.per_size[k - 1].mean -
                                          2.0 * combined_sem(est.per_size[k].sem, est.per_size[k - 1].sem));
    }
  }
  EXPECT_EQ(est.point_estimate, est.per_size.back().mean);
}

TEST(TauEstimate, RowZeroIsALawOfLargeNumbers) {
  // T(n, 0) is a sum of n + 1 Exp(r) variables.
  const double r = 0.5;
  const auto est = tau_estimate(PointMass{r}, 1.0, 0.0, {400}, 40);
  const auto& s = est.per_size[0];
  EXPECT_NEAR(s.mean, 401.0 / 400.0 / r, 3.0 * s.sem);
}

TEST(TauEstimate, OriginIsASingleCell) {
  const auto est = tau_estimate(TwoPoint{0.5, 1.0, 0.5}, 0.0, 0.0, {1000}, 10);
  EXPECT_LT(est.point_estimate, 0.05);
  EXPECT_GT(est.point_estimate, 0.0);
}

TEST(TauEstimate, WorkerCountDoesNotChangeResults) {
  const auto a = tau_estimate(Uniform{0.5, 1.0}, 0.5, 1.0, {30, 60}, 6, {9, 1});
  const auto b = tau_estimate(Uniform{0.5, 1.0}, 0.5, 1.0, {30, 60}, 6, {9, 3});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(a.per_size[k].mean, b.per_size[k].mean);
    EXPECT_EQ(a.per_size[k].sem, b.per_size[k].sem);
  }
}

TEST(TauEstimate, Validation) {
  EXPECT_THROW(tau_estimate(PointMass{1.0}, -2.0, 1.0, {10}, 4), DomainError);
  EXPECT_THROW(tau_estimate(PointMass{1.0}, 0.0, -1.0, {10}, 4), DomainError);
  EXPECT_THROW(tau_estimate(PointMass{1.0}, 0.0, 1.0, {10}, 1), ParameterError);
  EXPECT_THROW(tau_estimate(PointMass{1.0}, 0.0, 1.0, {20, 10}, 4), ParameterError);
  EXPECT_THROW(tau_estimate(PointMass{1.0}, 0.0, 1.0, {}, 4), ParameterError);
}
