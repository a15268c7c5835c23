#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "cantordiff/simulate.hpp"
#include "oracles/brute.hpp"

using namespace cantordiff;

namespace {

/// Lag histogram by the plain double loop.
std::map<std::int64_t, std::uint64_t> brute_lags(const std::vector<std::uint64_t>& a,
                                                 const std::vector<std::uint64_t>& b) {
  std::map<std::int64_t, std::uint64_t> out;
  for (auto i : a)
    for (auto j : b) ++out[static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j)];
  return out;
}

ColumnId col(int level, Side side, std::uint64_t index) { return {level, side, index}; }

}  // namespace

TEST(CounterRng, PureFunctionOfKey) {
  const CounterRng a(7), b(7), c(8);
  EXPECT_EQ(a.bits(1, 1, 2, 3), b.bits(1, 1, 2, 3));
  EXPECT_NE(a.bits(1, 1, 2, 3), c.bits(1, 1, 2, 3));
  EXPECT_NE(a.bits(1, 1, 2, 3), a.bits(1, 2, 2, 3));
  EXPECT_NE(a.bits(1, 1, 2, 3), a.bits(1, 1, 3, 3));
  EXPECT_NE(a.bits(1, 1, 2, 3), a.bits(2, 1, 2, 3));
  double sum = 0;
  for (std::uint64_t n = 0; n < 100000; ++n) {
    const double u = a.uniform(0, 1, 1, n);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Sample, DegenerateProbabilities) {
  const CounterRng rng(1);
  const auto full = sample({1, 1, 1}, 4, rng, 0, 1);
  for (int n = 0; n <= 4; ++n) EXPECT_EQ(full.at(n).size(), checked_power(3, n));
  const auto cantor = sample({1, 0, 1}, 4, rng, 0, 1);
  std::vector<std::uint64_t> expect;
  for (auto v : oracle::survivors({1, 0, 1}, 4)) expect.push_back(static_cast<std::uint64_t>(v));
  EXPECT_EQ(cantor.at(4), expect);
  EXPECT_THROW(cantor.at(5), std::out_of_range);
}

TEST(Sample, HereditaryAndSorted) {
  const CounterRng rng(2);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto s = sample({0.7, 0.3, 0.9, 0.5}, 6, rng, t, 1);
    ASSERT_EQ(s.at(0), (std::vector<std::uint64_t>{0}));
    for (int n = 1; n <= 6; ++n) {
      const auto& cur = s.at(n);
      EXPECT_TRUE(std::is_sorted(cur.begin(), cur.end()));
      for (auto v : cur) EXPECT_TRUE(std::binary_search(s.at(n - 1).begin(), s.at(n - 1).end(), v / 4));
    }
  }
}

TEST(Sample, Budget) {
  const CounterRng rng(3);
  try {
    sample({1, 1}, 30, rng, 0, 1, 1e6);
    FAIL() << "expected a budget error";
  } catch (const BudgetExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("level 20"), std::string::npos) << e.what();
  }
}

TEST(Sample, MeanFirstLevel) {
  const CounterRng rng(4);
  const int trials = 100000;
  double sum = 0, sq = 0;
  for (int t = 0; t < trials; ++t) {
    const double z = static_cast<double>(sample({0.7, 0.7}, 1, rng, static_cast<std::uint64_t>(t), 1).at(1).size());
    sum += z;
    sq += z * z;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sq / trials - mean * mean) / trials);
  EXPECT_NEAR(mean, 1.4, 3 * se);
}

TEST(ColumnHistogram, FullSquareLevelOne) {
  const CounterRng rng(5);
  const auto s = sample({1, 1}, 1, rng, 0, 1);
  const auto h = column_histogram(s, s, 1);
  EXPECT_EQ(h.z_l(col(1, Side::Positive, 0)), 1u);
  EXPECT_EQ(h.z_r(col(1, Side::Positive, 0)), 2u);
  EXPECT_EQ(h.z_l(col(1, Side::Positive, 1)), 0u);
  EXPECT_EQ(h.z_r(col(1, Side::Positive, 1)), 1u);
  EXPECT_EQ(h.z_l(col(1, Side::Negative, 1)), 2u);
  EXPECT_EQ(h.z_r(col(1, Side::Negative, 1)), 1u);
  EXPECT_EQ(h.z_l(col(1, Side::Negative, 0)), 1u);
  EXPECT_EQ(h.z_r(col(1, Side::Negative, 0)), 0u);
  EXPECT_EQ(h.total(), 8u);
}

TEST(ColumnHistogram, CountsMatchGeometry) {
  // every L and R triangle of every square pair, located by the min-vertex rule
  const CounterRng rng(6);
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto s1 = sample({0.8, 0.6, 0.9}, 3, rng, t, 1);
    const auto s2 = sample({0.8, 0.6, 0.9}, 3, rng, t, 2);
    const std::int64_t n = 27;
    std::map<std::pair<bool, std::int64_t>, std::pair<std::uint64_t, std::uint64_t>> counts;
    for (auto i : s1.at(3)) {
      for (auto j : s2.at(3)) {
        const auto d = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j);
        const std::int64_t l = d - 1, r = d;
        ++(l >= 0 ? counts[{false, l}] : counts[{true, l + n}]).first;
        ++(r >= 0 ? counts[{false, r}] : counts[{true, r + n}]).second;
      }
    }
    const auto h = column_histogram(s1, s2, 3);
    for (bool neg : {false, true}) {
      for (std::int64_t k = 0; k < n; ++k) {
        const auto c = col(3, neg ? Side::Negative : Side::Positive, static_cast<std::uint64_t>(k));
        const auto it = counts.find({neg, k});
        const auto expect = it == counts.end() ? std::pair<std::uint64_t, std::uint64_t>{0, 0} : it->second;
        EXPECT_EQ(h.z_l(c), expect.first);
        EXPECT_EQ(h.z_r(c), expect.second);
      }
    }
    EXPECT_EQ(h.total(), 2 * s1.at(3).size() * s2.at(3).size());
  }
}

TEST(ColumnHistogram, StrategiesAgree) {
  const CounterRng rng(7);
  for (std::uint64_t t = 0; t < 10; ++t) {
    for (double p : {0.3, 0.7, 0.95}) {
      const auto s1 = sample({p, p, p}, 6, rng, t, 1);
      const auto s2 = sample({p, 0.9, p}, 6, rng, t, 2);
      const auto direct = column_histogram(s1, s2, 6, HistogramStrategy::Direct);
      const auto merge = column_histogram(s1, s2, 6, HistogramStrategy::SortedMerge);
      const auto conv = column_histogram(s1, s2, 6, HistogramStrategy::Convolution);
      EXPECT_EQ(direct.lags, merge.lags);
      EXPECT_EQ(direct.lags, conv.lags);
      const auto brute = brute_lags(s1.at(6), s2.at(6));
      EXPECT_EQ(direct.lags, (std::vector<std::pair<std::int64_t, std::uint64_t>>(brute.begin(), brute.end())));
    }
  }
}

TEST(ColumnHistogram, AutoSelection) {
  const CounterRng rng(8);
  const auto small = sample({1, 1}, 5, rng, 0, 1);
  EXPECT_EQ(column_histogram(small, small, 5).strategy, HistogramStrategy::Direct);
  const auto dense = sample({1, 1}, 11, rng, 0, 1);
  const auto h = column_histogram(dense, dense, 11);
  EXPECT_EQ(h.strategy, HistogramStrategy::Convolution);
  EXPECT_EQ(h.total(), 2 * 2048u * 2048u);
  EXPECT_EQ(h.lag_count(0), 2048u);
  EXPECT_EQ(h.lag_count(-2047), 1u);
  const auto sparse = sample({1, 0, 0, 1, 0, 0, 0, 1}, 7, rng, 0, 1);
  const auto hs = column_histogram(sparse, sparse, 7);
  EXPECT_EQ(hs.strategy, HistogramStrategy::SortedMerge);
  EXPECT_EQ(hs.total(), 2 * 2187u * 2187u);
}

TEST(ColumnHistogram, EmptySample) {
  const CounterRng rng(9);
  const auto empty = sample({0, 0}, 2, rng, 0, 1);
  const auto full = sample({1, 1}, 2, rng, 0, 1);
  for (auto s : {HistogramStrategy::Direct, HistogramStrategy::SortedMerge, HistogramStrategy::Convolution}) {
    const auto h = column_histogram(empty, full, 2, s);
    EXPECT_TRUE(h.lags.empty());
    EXPECT_EQ(h.total(), 0u);
  }
  EXPECT_THROW(column_histogram(empty, full, 3), std::out_of_range);
}

TEST(ColumnPairEmpty, MatchesBrute) {
  const CounterRng rng(10);
  for (std::uint64_t t = 0; t < 30; ++t) {
    const auto s1 = sample({0.9, 0.4, 0.8}, 3, rng, t, 1);
    const auto s2 = sample({0.9, 0.4, 0.8}, 3, rng, t, 2);
    const auto lags = brute_lags(s1.at(3), s2.at(3));
    for (std::uint64_t w = 0; w < 27; ++w) {
      const auto k = static_cast<std::int64_t>(w);
      bool any = false;
      for (std::int64_t lag : {k, k + 1, k - 27, k + 1 - 27}) any = any || lags.count(lag) > 0;
      EXPECT_EQ(column_pair_empty(s1.at(3), s2.at(3), w, 27), !any);
    }
  }
}

TEST(RunExperiment, LevelOneMeansMatchCorrelations) {
  const auto spec = CantorSpec::create({0.9, 0.2, 0.6}, std::vector<double>{0.5, 0.8, 0.7});
  const auto s = run_experiment(spec, 1, 100000, 11);
  ASSERT_EQ(s.level1_columns.size(), 3u);
  const auto g = correlations(spec);
  for (const auto& c : s.level1_columns) {
    EXPECT_NEAR(c.z_l_mean, g[static_cast<std::size_t>(c.k + 1)], 3 * c.z_l_se) << c.k;
    EXPECT_NEAR(c.z_r_mean, g[static_cast<std::size_t>(c.k)], 3 * c.z_r_se) << c.k;
    EXPECT_EQ(c.expected_l, g[static_cast<std::size_t>(c.k + 1)]);
  }
  const double se1 = std::sqrt(s.f1[1].survivors_var / 100000);
  EXPECT_NEAR(s.f1[1].survivors_mean, 1.7, 3 * se1);
  const double se2 = std::sqrt(s.f2[1].survivors_var / 100000);
  EXPECT_NEAR(s.f2[1].survivors_mean, 2.0, 3 * se2);
}

TEST(RunExperiment, MandelbrotDimension) {
  const auto s = run_experiment(CantorSpec::create({0.8, 0.8, 0.8}), 8, 10000, 12, {1, kDefaultSurvivorCap, false});
  ASSERT_TRUE(s.dimension_f1.has_value());
  EXPECT_NEAR(*s.dimension_f1, std::log(2.4) / std::log(3.0), 0.05);
  for (std::size_t n = 1; n < s.f1.size(); ++n) EXPECT_LE(s.f1[n].survival_rate, s.f1[n - 1].survival_rate);
}

TEST(RunExperiment, SubcriticalDiesOut) {
  const auto s = run_experiment(CantorSpec::create({0.4, 0.4}), 20, 10000, 13, {1, kDefaultSurvivorCap, false});
  EXPECT_LT(s.f1[20].survival_rate, 0.01);
  EXPECT_FALSE(s.dimension_f1.has_value() && s.f1[20].survival_rate == 0.0);
}

TEST(RunExperiment, EmptyConstantColumnsGrow) {
  const auto s = run_experiment(CantorSpec::create({1, 0, 0.75}), 6, 4000, 14);
  std::vector<double> frac;
  for (const auto& c : s.constant_columns)
    if (c.digit == 1) frac.push_back(c.empty_fraction);
  ASSERT_EQ(frac.size(), 6u);
  EXPECT_LT(frac.front(), frac.back());
  for (std::size_t i = 1; i < frac.size(); ++i) EXPECT_GE(frac[i] + 0.02, frac[i - 1]);
}

TEST(RunExperiment, ThreadIndependent) {
  const auto spec = CantorSpec::create({0.9, 0.5, 0.7});
  const auto one = run_experiment(spec, 4, 3000, 15, {1});
  const auto eight = run_experiment(spec, 4, 3000, 15, {8});
  EXPECT_EQ(one, eight);
  std::ostringstream a, b;
  write_csv(a, one);
  write_csv(b, eight);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(run_experiment(spec, 4, 3000, 16, {1}), one);
}

TEST(RunExperiment, CsvShape) {
  const auto s = run_experiment(CantorSpec::create({0.9, 0.9}), 3, 100, 17);
  std::ostringstream os;
  write_csv(os, s);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "level,trials,survivors_mean,survivors_var,survival_rate,dim_estimate");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  EXPECT_EQ(rows, 4);
}

TEST(RunExperiment, Preconditions) {
  const auto spec = CantorSpec::create({1, 1});
  EXPECT_THROW(run_experiment(spec, 1, 0, 1), std::invalid_argument);
  EXPECT_THROW(run_experiment(spec, 30, 1, 1), BudgetExceeded);
}

TEST(ExpectedColumnDecay, Examples) {
  const auto spec = CantorSpec::create({1, 0, 0.75});
  const auto norms = expected_column_decay(spec, {}, 1, 30);
  const auto m1 = expectation_matrix(spec, 1);
  oracle::Mat2 acc{1, 0, 0, 1};
  for (int m = 0; m < 30; ++m) {
    acc = oracle::mul(acc, {m1.ll, m1.lr, m1.rl, m1.rr});
    EXPECT_NEAR(norms[static_cast<std::size_t>(m)], acc.ll + acc.lr + acc.rl + acc.rr, 1e-12);
  }
  EXPECT_LT(norms.back(), 0.01);

  const auto grow = expected_column_decay(CantorSpec::create({0.9, 0.9, 0.9}), {}, 0, 10);
  for (std::size_t i = 1; i < grow.size(); ++i) EXPECT_GT(grow[i], grow[i - 1]);

  // only the last digit repeats, so the tail ratio tends to lambda(M(3))
  const auto fam = CantorSpec::create({1, 0, 1, 0.3});
  const auto d = expected_column_decay(fam, {0}, 3, 60);
  const double lambda = pf_eigenvalue(expectation_matrix(fam, 3));
  EXPECT_NEAR(d[59] / d[58], lambda, 1e-6);
}
