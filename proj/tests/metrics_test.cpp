//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/metrics.h"

#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oodscore/errors.h"
#include "support.h"

namespace oodscore {
namespace {

using Vec = std::vector<double>;

TEST(PearsonTest, HandExamples) {
  EXPECT_NEAR(pearson(Vec { 1, 2, 3, 4 }, Vec { 2, 1, 4, 3 }), 0.6, 1e-12);
  const Vec x { 0.3, -1.2, 4.0, 2.2, 0.0 };
  Vec neg;
  for (double v: x)
    neg.push_back(-v);
  EXPECT_NEAR(pearson(x, x), 1.0, 1e-12);
  EXPECT_NEAR(pearson(x, neg), -1.0, 1e-12);
}

TEST(PearsonTest, Errors) {
  EXPECT_THROW(pearson(Vec { 1, 1, 1 }, Vec { 1, 2, 3 }), UndefinedMetricError);
  EXPECT_THROW(pearson(Vec { 1, 2, 3 }, Vec { 5, 5, 5 }), UndefinedMetricError);
  EXPECT_THROW(pearson(Vec { 1, 2 }, Vec { 1, 2, 3 }), ValidationError);
  EXPECT_THROW(pearson(Vec { 1 }, Vec { 1 }), ValidationError);
}

TEST(PearsonTest, MatchesOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_int_distribution<int> len(2, 40);
  for (int t = 0; t < 300; ++t) {
    Vec x, y;
    const int m = len(rng);
    for (int i = 0; i < m; ++i) {
      x.push_back(n(rng));
      y.push_back(0.5 * x.back() + n(rng));
    }
    EXPECT_NEAR(pearson(x, y), test::oracle_pearson(x, y), 1e-10);
  }
}

TEST(PearsonTest, InvarianceAndSymmetry) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(0.1, 10.0), b(-50.0, 50.0);
  for (int t = 0; t < 200; ++t) {
    Vec x, y;
    for (int i = 0; i < 25; ++i) {
      x.push_back(n(rng));
      y.push_back(x.back() + n(rng));
    }
    const double r = pearson(x, y), s = a(rng), c = b(rng);
    Vec pos = x, neg = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      pos[i] = s * x[i] + c;
      neg[i] = -s * x[i] + c;
    }
    EXPECT_NEAR(pearson(pos, y), r, 1e-10);
    EXPECT_NEAR(pearson(neg, y), -r, 1e-10);
    EXPECT_EQ(pearson(y, x), r);
  }
}

TEST(RmseTest, HandExamples) {
  EXPECT_NEAR(rmse(Vec { 0, 0 }, Vec { 3, 4 }), std::sqrt(12.5), 1e-12);
  const Vec x { 1.5, -2.0, 7.25 };
  Vec shifted = x;
  for (auto &v: shifted)
    v -= 2.5;
  EXPECT_NEAR(rmse(x, shifted), 2.5, 1e-12);
  EXPECT_EQ(rmse(x, x), 0.0);
  EXPECT_THROW(rmse(Vec {}, Vec {}), ValidationError);
  EXPECT_THROW(rmse(Vec { 1 }, Vec { 1, 2 }), ValidationError);
}

TEST(RmseTest, OracleAndTriangle) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    Vec x, y, z;
    for (int i = 0; i < 15; ++i) {
      x.push_back(n(rng));
      y.push_back(n(rng));
      z.push_back(n(rng));
    }
    EXPECT_NEAR(rmse(x, y), test::oracle_rmse(x, y), 1e-10);
    EXPECT_LE(rmse(x, z), rmse(x, y) + rmse(y, z) + 1e-10);
  }
}

DecoyEntry pose(std::string id, double score, std::optional<double> rmsd,
                DecoyKind kind = DecoyKind::kDecoyPose) {
  return { std::move(id), kind, score, rmsd };
}

TEST(DockingTest, SingleTargetExamples) {
  const DecoySet hit { "A", { pose("p1", 9.0, 0.5), pose("p2", 3.0, 4.0) } };
  const DecoySet miss { "B", { pose("p1", 9.0, 2.5), pose("p2", 3.0, 4.0) } };
  EXPECT_EQ(docking_success_rate(std::vector { hit }), 1.0);
  EXPECT_EQ(docking_success_rate(std::vector { miss }), 0.0);
  DockingOptions top2;
  top2.top_n = 2;
  EXPECT_EQ(docking_success_rate(std::vector { miss }, top2), 0.0);
}

TEST(DockingTest, FourTargetsTwoSuccesses) {
  // A: best pose is near-native. B: best pose is far, second near (top-1
  // fails). C: tie at the top broken by id, "a" (near) wins. D: native pose
  // without RMSD scored highest.
  const std::vector<DecoySet> sets {
    { "A", { pose("x", 5.0, 1.0), pose("y", 4.0, 6.0) } },
    { "B", { pose("x", 5.0, 3.0), pose("y", 4.0, 1.0) } },
    { "C", { pose("b", 7.0, 8.0), pose("a", 7.0, 1.9) } },
    { "D", { pose("n", 1.0, std::nullopt, DecoyKind::kNativePose),
             pose("z", 2.0, 2.1) } },
  };
  EXPECT_EQ(docking_success_rate(sets), 0.5);
  EXPECT_EQ(docking_success_rate(sets), test::oracle_docking(sets, 2.0, 1));
  DockingOptions top2;
  top2.top_n = 2;
  EXPECT_EQ(docking_success_rate(sets, top2), 1.0);
}

TEST(DockingTest, Errors) {
  EXPECT_THROW(docking_success_rate(std::vector<DecoySet> {}), ValidationError);
  const DecoySet s { "A", { pose("x", 1.0, 1.0) } };
  DockingOptions bad;
  bad.top_n = 0;
  EXPECT_THROW(docking_success_rate(std::vector { s }, bad), ValidationError);
  const DecoySet unscored { "A", { { "x", DecoyKind::kDecoyPose, std::nullopt, 1.0 } } };
  EXPECT_THROW(docking_success_rate(std::vector { unscored }), ValidationError);
  const DecoySet no_rmsd { "A", { pose("x", 1.0, std::nullopt) } };
  EXPECT_THROW(docking_success_rate(std::vector { no_rmsd }), ValidationError);
}

TEST(DockingTest, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(14);
  std::uniform_int_distribution<int> ntargets(1, 6), topn(1, 4);
  std::uniform_real_distribution<double> cutoff(0.0, 5.0);
  for (int t = 0; t < 300; ++t) {
    std::vector<DecoySet> sets;
    const int nt = ntargets(rng);
    for (int i = 0; i < nt; ++i)
      sets.push_back(test::random_decoy_set(rng, false));
    DockingOptions o;
    o.rmsd_cutoff = cutoff(rng);
    o.top_n = topn(rng);
    EXPECT_EQ(docking_success_rate(sets, o),
              test::oracle_docking(sets, o.rmsd_cutoff, o.top_n));
  }
}

DecoySet screening_set(int n, int actives_first) {
  DecoySet s { "S", {} };
  for (int i = 0; i < n; ++i) {
    s.entries.push_back({ test::numbered("m", i),
                          i < actives_first ? DecoyKind::kActive : DecoyKind::kInactive,
                          static_cast<double>(n - i), std::nullopt });
  }
  return s;
}

TEST(EnrichmentTest, Examples) {
  const auto s = screening_set(100, 10);
  EXPECT_DOUBLE_EQ(enrichment_factor(s, 0.10), 10.0);
  EXPECT_EQ(enrichment_factor(s, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(enrichment_factor(s, 0.05), 10.0);
  // Top ceil(0.005 * 100) = 1 entry.
  EXPECT_DOUBLE_EQ(enrichment_factor(s, 0.005), 10.0);
  // 0.07 * 100 is not exactly 7 in binary; the top count must still be 7.
  EXPECT_DOUBLE_EQ(enrichment_factor(screening_set(100, 7), 0.07), 100.0 / 7.0);
  EXPECT_DOUBLE_EQ(enrichment_factor(s, 0.2), 5.0);
}

TEST(EnrichmentTest, Errors) {
  EXPECT_THROW(enrichment_factor(screening_set(10, 0), 0.1), ValidationError);
  EXPECT_THROW(enrichment_factor(screening_set(10, 2), 0.0), ValidationError);
  EXPECT_THROW(enrichment_factor(screening_set(10, 2), 1.5), ValidationError);
  EXPECT_THROW(enrichment_factor(DecoySet { "E", {} }, 0.5), ValidationError);
}

TEST(EnrichmentTest, MatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<long long> num(1, 200);
  for (int t = 0; t < 500; ++t) {
    const auto s = test::random_decoy_set(rng, true);
    const long long a = num(rng);
    const long long den = 200;
    EXPECT_EQ(enrichment_factor(s, static_cast<double>(a) / den),
              test::oracle_ef(s, a, den));
  }
}

TEST(EnrichmentTest, NullModelAveragesToOne) {
  std::mt19937_64 rng(16);
  auto s = screening_set(200, 20);
  std::vector<double> scores;
  for (const auto &e: s.entries)
    scores.push_back(*e.score);
  const int trials = 2000;
  std::vector<double> ef;
  for (int t = 0; t < trials; ++t) {
    std::shuffle(scores.begin(), scores.end(), rng);
    for (std::size_t i = 0; i < scores.size(); ++i)
      s.entries[i].score = scores[i];
    ef.push_back(enrichment_factor(s, 0.10));
  }
  const double mean = std::accumulate(ef.begin(), ef.end(), 0.0) / trials;
  double ss = 0;
  for (double v: ef)
    ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (trials - 1)) / std::sqrt(trials);
  EXPECT_LT(std::abs(mean - 1.0), 3 * se) << "mean " << mean << " se " << se;
}

TEST(AggregateTest, SevenTargetAverageAndMinimum) {
  const Vec r { 0.451, 0.696, 0.415, 0.384, 0.481, 0.047, 0.480 };
  const auto a = aggregate_pearson(r);
  EXPECT_NEAR(a.avg_pearson, 0.422, 0.0005);
  EXPECT_EQ(a.min_pearson, 0.047);
  const auto one = aggregate_pearson(Vec { 0.3 });
  EXPECT_EQ(one.avg_pearson, 0.3);
  EXPECT_EQ(one.min_pearson, 0.3);
  EXPECT_THROW(aggregate_pearson(Vec {}), ValidationError);
}

Dataset labelled(const std::map<std::string, double> &pk) {
  std::vector<ComplexRecord> recs;
  for (const auto &[id, v]: pk)
    recs.push_back(test::make_record(id, "C", v));
  return Dataset(std::move(recs));
}

TEST(BuildReportTest, ThreeTargetsMatchHandAggregates) {
  const auto ds = labelled({ { "a1", 5 }, { "a2", 6 }, { "a3", 7 },
                             { "b1", 4 }, { "b2", 8 }, { "b3", 6 },
                             { "c1", 3 }, { "c2", 9 } });
  const TargetPredictions preds {
    { "A", { { "a1", 5.5 }, { "a2", 5.9 }, { "a3", 7.4 } } },
    { "B", { { "b1", 7.0 }, { "b2", 5.0 }, { "b3", 6.1 } } },
    { "C", { { "c1", 4.0 }, { "c2", 8.0 } } },
  };
  const std::map<std::string, std::vector<std::string>> expected {
    { "A", { "a1", "a2", "a3" } }, { "B", { "b1", "b2", "b3" } }, { "C", { "c1", "c2" } }
  };
  const auto rep = build_report(preds, ds, expected);
  const double ra = test::oracle_pearson({ 5.5, 5.9, 7.4 }, { 5, 6, 7 });
  const double rb = test::oracle_pearson({ 7.0, 5.0, 6.1 }, { 4, 8, 6 });
  EXPECT_NEAR(rep.per_target.at("A").pearson_r, ra, 1e-12);
  EXPECT_NEAR(rep.per_target.at("B").pearson_r, rb, 1e-12);
  EXPECT_NEAR(rep.per_target.at("C").pearson_r, 1.0, 1e-12);
  EXPECT_NEAR(rep.per_target.at("C").rmse, 1.0, 1e-12);
  EXPECT_EQ(rep.per_target.at("B").n, 3u);
  EXPECT_NEAR(rep.aggregate.avg_pearson, (ra + rb + 1.0) / 3, 1e-12);
  EXPECT_NEAR(rep.aggregate.min_pearson, std::min({ ra, rb, 1.0 }), 1e-12);

  const auto csv = to_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "target,n,pearson_r,rmse");
  EXPECT_NE(csv.find("\nAvg,,"), std::string::npos);
  EXPECT_NE(csv.find("\nMin,,"), std::string::npos);
  EXPECT_EQ(to_json(rep)["aggregate"]["min_pearson"].get<double>(),
            rep.aggregate.min_pearson);
}

TEST(BuildReportTest, CoverageErrorsListIds) {
  const auto ds = labelled({ { "a1", 5 }, { "a2", 6 }, { "a3", 7 }, { "zz", 1 } });
  const std::map<std::string, std::vector<std::string>> expected {
    { "A", { "a1", "a2", "a3" } }
  };
  try {
    build_report({ { "A", { { "a1", 1.0 }, { "a2", 2.0 }, { "zz", 3.0 } } } }, ds, expected);
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("missing a3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("unexpected zz"), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_report({}, ds, expected), ValidationError);
  EXPECT_THROW(build_report({ { "A", { { "a1", 1.0 }, { "a2", 1.0 }, { "a3", 1.0 } } } },
                            ds, expected),
               UndefinedMetricError);
}

TEST(DecoyCsvTest, ReadsSetsInOrder) {
  test::TempDir dir;
  test::write_text(dir / "d.csv",
                   "target_id,entry_id,kind,score,rmsd\n"
                   "T2,p1,native_pose,1.5,\n"
                   "T1,p1,decoy_pose,2,3.5\n"
                   "T2,p2,decoy_pose,,1\n");
  const auto sets = read_decoy_csv(dir / "d.csv");
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].target_id, "T2");
  ASSERT_EQ(sets[0].entries.size(), 2u);
  EXPECT_EQ(sets[0].entries[0].kind, DecoyKind::kNativePose);
  EXPECT_FALSE(sets[0].entries[0].rmsd_to_native);
  EXPECT_FALSE(sets[0].entries[1].score);
  EXPECT_EQ(*sets[1].entries[0].rmsd_to_native, 3.5);

  test::write_text(dir / "bad.csv", "target_id,entry_id,kind,score\nT,p,weird,1\n");
  try {
    read_decoy_csv(dir / "bad.csv");
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv:2"), std::string::npos) << e.what();
  }
  test::write_text(dir / "neg.csv", "target_id,entry_id,kind,rmsd\nT,p,decoy_pose,-1\n");
  EXPECT_THROW(read_decoy_csv(dir / "neg.csv"), ValidationError);
}

}  // namespace
}  // namespace oodscore
