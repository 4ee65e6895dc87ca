#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sigsparse/error.hpp"
#include "sigsparse/metrics.hpp"

using namespace sigsparse;

TEST(Metrics, SeparatedExample) {
  const std::vector<double> g{1, 2}, f{-2, -1};
  EXPECT_EQ(far_at(f, 0.0), 0.0);
  EXPECT_EQ(frr_at(g, 0.0), 0.0);
  EXPECT_EQ(eer(g, f).rate, 0.0);
}

TEST(Metrics, IdenticalMultisetsGiveFifty) {
  const std::vector<double> s{0.1, 0.4, 0.4, 0.9, 1.3};
  EXPECT_NEAR(eer(s, s).rate, 50.0, 1e-12);
}

TEST(Metrics, TieConvention) {
  const std::vector<double> g{1.0}, f{1.0};
  EXPECT_EQ(far_at(f, 1.0), 100.0);  // forgery at the threshold is accepted
  EXPECT_EQ(frr_at(g, 1.0), 0.0);
}

TEST(Metrics, CurveMatchesCountingOracle) {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> g, f;
    for (int i = 0; i < 15; ++i) g.push_back(std::round(4 * n(rng) + 2) / 4);
    for (int i = 0; i < 20; ++i) f.push_back(std::round(4 * n(rng)) / 4);
    const auto curve = far_frr_curve(g, f);
    const auto ts = oracle::thresholds(g, f);
    ASSERT_EQ(curve.size(), ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      EXPECT_EQ(curve[i].threshold, ts[i]);
      EXPECT_DOUBLE_EQ(curve[i].far, oracle::far(f, ts[i]));
      EXPECT_DOUBLE_EQ(curve[i].frr, oracle::frr(g, ts[i]));
      if (i > 0) {
        EXPECT_LE(curve[i].far, curve[i - 1].far);
        EXPECT_GE(curve[i].frr, curve[i - 1].frr);
      }
    }
    EXPECT_EQ(curve.front().frr, 0.0);
    EXPECT_EQ(curve.front().far, 100.0);
    EXPECT_EQ(curve.back().far, 0.0);
    EXPECT_EQ(curve.back().frr, 100.0);
  }
}

TEST(Metrics, EerMatchesSweepOracle) {
  std::mt19937_64 rng(102);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> g, f;
    for (int i = 0; i < 10; ++i) g.push_back(n(rng) + 1.0);
    for (int i = 0; i < 10; ++i) f.push_back(n(rng));
    const auto e = eer(g, f);
    const auto o = oracle::eer(g, f);
    EXPECT_NEAR(e.rate, o.first, 1e-9);
    EXPECT_NEAR(e.threshold, o.second, 1e-9);
    // The crossing lies between the best min- and max-rate operating points.
    double lo = 0, hi = 100;
    for (double th : oracle::thresholds(g, f)) {
      lo = std::max(lo, std::min(oracle::far(f, th), oracle::frr(g, th)));
      hi = std::min(hi, std::max(oracle::far(f, th), oracle::frr(g, th)));
    }
    EXPECT_GE(e.rate, lo - 1e-9);
    EXPECT_LE(e.rate, hi + 1e-9);
  }
}

TEST(Metrics, EerIsRankStatistic) {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> g, f, g2, f2;
  for (int i = 0; i < 30; ++i) g.push_back(n(rng) + 0.5);
  for (int i = 0; i < 30; ++i) f.push_back(n(rng));
  for (double v : g) g2.push_back(std::exp(3 * v) + 7);
  for (double v : f) f2.push_back(std::exp(3 * v) + 7);
  EXPECT_NEAR(eer(g, f).rate, eer(g2, f2).rate, 1e-9);
}

TEST(Metrics, PFarRandomTwoStep) {
  ScoreSet s{{0.9, 1.1, 1.4, 0.2}, {0.0, 0.5, 1.0, 0.3}, {-3, -2, 0.95, 2.0}};
  const auto e = eer(s.genuine, s.skilled);
  EXPECT_DOUBLE_EQ(p_far_r_at_eer_s(s), oracle::far(s.random, e.threshold));
  ScoreSet low{{1, 2}, {-1, 0}, {-50, -40}};
  EXPECT_EQ(p_far_r_at_eer_s(low), 0.0);
  ScoreSet same{{1, 2, 3}, {0.5, 1.5, 2.5}, {0.5, 1.5, 2.5}};
  const auto es = eer(same.genuine, same.skilled);
  EXPECT_DOUBLE_EQ(p_far_r_at_eer_s(same), far_at(same.skilled, es.threshold));
  EXPECT_THROW(p_far_r_at_eer_s(ScoreSet{{1}, {0}, {}}), Error);
}

TEST(Metrics, EmptyClassThrows) {
  const std::vector<double> e, one{1.0};
  EXPECT_THROW(far_frr_curve(e, one), Error);
  EXPECT_THROW(far_frr_curve(one, e), Error);
}

TEST(Metrics, AggregateMeans) {
  WriterMetrics a, b;
  a.writer = "a";
  b.writer = "b";
  a.eer_s = 2;
  b.eer_s = 4;
  EXPECT_DOUBLE_EQ(aggregate({a, b}).mean.eer_s, 3.0);
  EXPECT_DOUBLE_EQ(aggregate({a}).mean.eer_s, 2.0);
  // Writers first, then repetitions: rep 0 {2, 4} -> 3, rep 1 {10} -> 10.
  WriterMetrics c = a;
  c.repetition = 1;
  c.eer_s = 10;
  const auto rep = aggregate({a, b, c});
  EXPECT_DOUBLE_EQ(rep.mean.eer_s, 6.5);
  EXPECT_EQ(rep.repetitions, 2);
  EXPECT_EQ(rep.writers, 2);
  EXPECT_THROW(aggregate({}), Error);
}

TEST(Metrics, WriterMetricsUsesHardThreshold) {
  ScoreSet s{{1, 2, 3}, {0, 1.5}, {-1, 2.5}};
  const auto m = writer_metrics(s, 1.5);
  EXPECT_DOUBLE_EQ(m.frr_hard, 100.0 / 3);
  EXPECT_DOUBLE_EQ(m.far_s_hard, 50.0);
  EXPECT_DOUBLE_EQ(m.far_r_hard, 50.0);
  EXPECT_GE(m.eer_s, 0.0);
  EXPECT_LE(m.eer_s, 100.0);
}
