//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/trainer.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oodscore/errors.h"
#include "oodscore/synthetic.h"
#include "support.h"

namespace oodscore {
namespace {

ScorerConfig tiny_config(int epochs = 12) {
  ScorerConfig c;
  c.hidden_sizes = { 8 };
  c.dropout_rate = 0.0;
  c.learning_rate = 3e-3;
  c.max_epochs = epochs;
  c.patience = std::min(4, epochs);
  c.batch_size = 16;
  c.seed = 2;
  return c;
}

struct Fixture {
  SyntheticData data;
  SplitManifest manifest;
};

Fixture synthetic_fixture(std::uint64_t seed, int k = 5) {
  GeneratorSpec g;
  g.n_clusters = 4;
  g.cluster_sizes = { 60, 60, 60, 40 };
  g.embedding_dim = 6;
  g.ligand_dim = 3;
  g.seed = seed;
  Fixture f { generate(g), {} };
  f.manifest = build_ood_split(f.data.dataset, { { "T", "C003" } }, seed);
  f.manifest = stratified_kfold(f.manifest, f.data.dataset, k, 5, seed);
  f.manifest = holdout_limited(f.manifest, 25, seed);
  return f;
}

TrainerOptions options_for(const SplitManifest &m, int epochs = 12) {
  TrainerOptions o;
  o.scorer = tiny_config(epochs);
  o.curve_sets = target_curve_sets(m);
  return o;
}

std::set<std::string> all_test_ids(const SplitManifest &m) {
  std::set<std::string> ids;
  for (const auto &[_, t]: m.targets)
    ids.insert(t.test_ids.begin(), t.test_ids.end());
  return ids;
}

TEST(FinetuneConfigTest, DefaultsAndValidation) {
  FinetuneConfig f;
  EXPECT_EQ(f.finetune_epochs, 25);
  ScorerConfig base;
  base.learning_rate = 2e-3;
  EXPECT_DOUBLE_EQ(f.learning_rate(base), 2e-4);
  f.finetune_epochs = 0;
  EXPECT_THROW(f.validate(), ValidationError);
  EXPECT_EQ(parse_regime("skf"), Regime::kSkf);
  EXPECT_EQ(to_string(Regime::kFt), "FT");
}

TEST(CrossValidateTest, MinimalTwoFold) {
  std::vector<ComplexRecord> recs;
  for (int i = 0; i < 4; ++i) {
    recs.push_back(test::make_record("r" + std::to_string(i), "A", 4.0 + i,
                                     { 0.1 * i, 1.0 - 0.2 * i }));
  }
  recs.push_back(test::make_record("t0", "T", 5, { 0.0, 0.0 }));
  recs.push_back(test::make_record("t1", "T", 6, { 1.0, 0.0 }));
  Dataset ds(std::move(recs));
  auto m = build_ood_split(ds, { { "T", "T" } }, 0);
  m.k = 2;
  m.fold_assignment = { { "r0", 0 }, { "r2", 0 }, { "r1", 1 }, { "r3", 1 } };
  TrainerOptions o;
  o.scorer = tiny_config(3);
  const auto e = cross_validate(ds, m, o);
  ASSERT_EQ(e.members.size(), 2u);
  EXPECT_EQ(e.members[0].fold, 0);
  EXPECT_EQ(e.members[0].validation_ids, (std::vector<std::string> { "r0", "r2" }));
  EXPECT_EQ(e.members[1].validation_ids, (std::vector<std::string> { "r1", "r3" }));
  EXPECT_EQ(e.audit.gradient_ids, (std::set<std::string> { "r0", "r1", "r2", "r3" }));
}

TEST(CrossValidateTest, FiveMembersOnDisjointFolds) {
  const auto f = synthetic_fixture(1);
  const auto e = cross_validate(f.data.dataset, f.manifest, options_for(f.manifest));
  ASSERT_EQ(e.members.size(), 5u);
  std::set<std::string> seen;
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(e.members[static_cast<std::size_t>(i)].fold, i);
    for (const auto &id: e.members[static_cast<std::size_t>(i)].validation_ids)
      EXPECT_TRUE(seen.insert(id).second) << id;
  }
  EXPECT_EQ(seen.size(), f.manifest.train_val_ids.size());
  EXPECT_EQ(e.regime, Regime::kSkf);
}

TEST(CrossValidateTest, NoTestIdReceivesGradients) {
  const auto f = synthetic_fixture(2);
  const auto e = cross_validate(f.data.dataset, f.manifest, options_for(f.manifest));
  for (const auto &id: all_test_ids(f.manifest))
    EXPECT_FALSE(e.audit.gradient_ids.contains(id)) << id;
  for (const auto &id: e.audit.eval_ids)
    EXPECT_TRUE(all_test_ids(f.manifest).contains(id));
}

TEST(CrossValidateTest, Deterministic) {
  const auto f = synthetic_fixture(3);
  const auto a = cross_validate(f.data.dataset, f.manifest, options_for(f.manifest));
  const auto b = cross_validate(f.data.dataset, f.manifest, options_for(f.manifest));
  EXPECT_EQ(curves_to_csv(track_curves(a)), curves_to_csv(track_curves(b)));
  for (std::size_t i = 0; i < a.members.size(); ++i)
    EXPECT_EQ(serialize_scorer(a.members[i].scorer), serialize_scorer(b.members[i].scorer));
}

TEST(CrossValidateTest, RequiresFolds) {
  auto f = synthetic_fixture(3);
  f.manifest.fold_assignment.clear();
  EXPECT_THROW(cross_validate(f.data.dataset, f.manifest, options_for(f.manifest)),
               ValidationError);
}

TEST(TargetValidationTest, HoldoutOnlyValidates) {
  const auto f = synthetic_fixture(4);
  const auto e = train_with_target_validation(f.data.dataset, f.manifest, "T",
                                              options_for(f.manifest));
  EXPECT_EQ(e.regime, Regime::kVal);
  EXPECT_EQ(e.members.size(), 5u);
  const auto &holdout = f.manifest.target("T").holdout_ids;
  for (const auto &m: e.members)
    EXPECT_EQ(m.validation_ids, holdout);
  for (const auto &id: holdout) {
    EXPECT_FALSE(e.audit.gradient_ids.contains(id));
    EXPECT_TRUE(e.audit.validation_ids.contains(id));
  }
  for (const auto &id: all_test_ids(f.manifest))
    EXPECT_FALSE(e.audit.gradient_ids.contains(id));
}

TEST(TargetValidationTest, SingleMemberWithoutFolds) {
  auto f = synthetic_fixture(5);
  f.manifest.fold_assignment.clear();
  const auto e = train_with_target_validation(f.data.dataset, f.manifest, "T",
                                              options_for(f.manifest));
  ASSERT_EQ(e.members.size(), 1u);
  EXPECT_EQ(e.audit.gradient_ids.size(), f.manifest.train_val_ids.size());
}

TEST(TargetValidationTest, TooFewEmbeddedHoldoutRecords) {
  auto f = synthetic_fixture(6);
  auto opts = options_for(f.manifest);
  opts.min_holdout_embedded = 26;
  EXPECT_THROW(train_with_target_validation(f.data.dataset, f.manifest, "T", opts),
               ValidationError);
}

TEST(FinetuneTest, GradientsExactlyOnHoldout) {
  const auto f = synthetic_fixture(7);
  const auto opts = options_for(f.manifest);
  const auto skf = cross_validate(f.data.dataset, f.manifest, opts);
  const auto ft = finetune(skf, f.data.dataset, f.manifest, "T", {}, opts);
  EXPECT_EQ(ft.regime, Regime::kFt);
  ASSERT_EQ(ft.members.size(), 1u);
  const auto &holdout = f.manifest.target("T").holdout_ids;
  EXPECT_EQ(ft.audit.gradient_ids, std::set<std::string>(holdout.begin(), holdout.end()));
  EXPECT_EQ(ft.members[0].scorer.history.back().epoch, 25);
  EXPECT_EQ(ft.members[0].scorer.best_epoch, 25);

  // Source = member with the best own-fold validation Pearson.
  ASSERT_EQ(ft.selection_evidence.size(), 5u);
  const auto best = std::max_element(ft.selection_evidence.begin(),
                                     ft.selection_evidence.end())
                    - ft.selection_evidence.begin();
  EXPECT_EQ(ft.source_members, (std::vector<int> { static_cast<int>(best) }));
}

TEST(FinetuneTest, ZeroLearningRateKeepsPredictions) {
  const auto f = synthetic_fixture(8);
  const auto opts = options_for(f.manifest);
  const auto skf = cross_validate(f.data.dataset, f.manifest, opts);
  FinetuneConfig cfg;
  cfg.finetune_learning_rate = 0.0;
  const auto ft = finetune(skf, f.data.dataset, f.manifest, "T", cfg, opts);
  const auto &src = skf.members[static_cast<std::size_t>(ft.source_members[0])].scorer;
  EXPECT_TRUE(std::equal(src.network.parameters().begin(), src.network.parameters().end(),
                         ft.members[0].scorer.network.parameters().begin()));
  for (const auto &r: f.data.dataset.records())
    EXPECT_EQ(src.predict_one(r), ft.members[0].scorer.predict_one(r));
}

TEST(FinetuneTest, AllMembersSelection) {
  const auto f = synthetic_fixture(9);
  const auto opts = options_for(f.manifest, 6);
  const auto skf = cross_validate(f.data.dataset, f.manifest, opts);
  FinetuneConfig cfg;
  cfg.finetune_epochs = 3;
  cfg.source_selection = SourceSelection::kAllMembers;
  const auto ft = finetune(skf, f.data.dataset, f.manifest, "T", cfg, opts);
  EXPECT_EQ(ft.members.size(), 5u);
}

TEST(FinetuneTest, Errors) {
  const auto f = synthetic_fixture(10);
  const auto opts = options_for(f.manifest, 4);
  const auto val = train_with_target_validation(f.data.dataset, f.manifest, "T", opts);
  EXPECT_THROW(finetune(val, f.data.dataset, f.manifest, "T", {}, opts), ValidationError);
  const auto skf = cross_validate(f.data.dataset, f.manifest, opts);
  FinetuneConfig zero;
  zero.finetune_epochs = 0;
  EXPECT_THROW(finetune(skf, f.data.dataset, f.manifest, "T", zero, opts), ValidationError);
}

EnsembleMember constant_member(double value, std::size_t dim) {
  EnsembleMember m;
  m.scorer.config = tiny_config();
  m.scorer.input_dimension = dim;
  m.scorer.standardizer.mean.assign(dim, 0.0);
  m.scorer.standardizer.scale.assign(dim, 1.0);
  m.scorer.network = Mlp(dim, { 8 }, Activation::kRelu);
  std::fill(m.scorer.network.parameters().begin(),
            m.scorer.network.parameters().end(), 0.0);
  m.scorer.network.output_bias() = value;
  m.scorer.history.push_back({});
  return m;
}

TEST(EnsemblePredictTest, MeanOfTwoAndIdentity) {
  const auto r = test::make_record("a", "C", 5, { 1.0, 2.0 });
  const std::vector<const ComplexRecord *> recs { &r };
  TrainedEnsemble e;
  e.members = { constant_member(5.0, 2), constant_member(7.0, 2) };
  EXPECT_EQ(ensemble_predict(e, recs).at("a"), 6.0);
  e.members.pop_back();
  EXPECT_EQ(ensemble_predict(e, recs).at("a"), 5.0);
  e.members.clear();
  EXPECT_THROW(ensemble_predict(e, recs), ValidationError);
}

TEST(EnsemblePredictTest, MatchesBruteForceMean) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  TrainedEnsemble e;
  for (int i = 0; i < 5; ++i) {
    auto m = constant_member(0.0, 4);
    m.scorer.network.initialize(rng);
    for (auto &p: m.scorer.network.parameters())
      p += 0.1 * n(rng);
    e.members.push_back(std::move(m));
  }
  std::vector<ComplexRecord> recs;
  for (int i = 0; i < 20; ++i)
    recs.push_back(test::make_record(test::numbered("x", i), "C", 5,
                                     { n(rng), n(rng), n(rng), n(rng) }));
  std::vector<const ComplexRecord *> ptrs;
  for (const auto &r: recs)
    ptrs.push_back(&r);
  const auto pred = ensemble_predict(e, ptrs);
  for (const auto &r: recs) {
    long double sum = 0;
    for (const auto &m: e.members)
      sum += m.scorer.predict_one(r);
    EXPECT_NEAR(pred.at(r.complex_id), static_cast<double>(sum / 5), 1e-12);
  }
}

TEST(CurveTest, MatchesBruteForceFromHistories) {
  const auto f = synthetic_fixture(11);
  auto opts = options_for(f.manifest, 30);
  opts.scorer.patience = 3;
  const auto e = cross_validate(f.data.dataset, f.manifest, opts);
  const auto curves = track_curves(e, std::vector<std::string> { "test:T" });
  int longest = 0;
  for (const auto &m: e.members)
    longest = std::max(longest, m.scorer.history.back().epoch);
  ASSERT_EQ(curves.size(), static_cast<std::size_t>(longest + 1));
  for (const auto &p: curves) {
    std::vector<double> v;
    for (const auto &m: e.members) {
      for (const auto &h: m.scorer.history) {
        if (h.epoch == p.epoch)
          v.push_back(h.eval_pearson.at("test:T"));
      }
    }
    double mean = 0;
    for (double x: v)
      mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x: v)
      ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    EXPECT_EQ(p.n_members, v.size());
    EXPECT_NEAR(p.mean_pearson, mean, 1e-12);
    EXPECT_NEAR(p.std_pearson, sd, 1e-12);
    EXPECT_DOUBLE_EQ(p.epoch_pct, 100.0 * p.epoch / 30.0);
  }
}

TEST(CurveTest, EarlyStopTruncatesAndSingleMemberHasZeroStd) {
  const auto f = synthetic_fixture(12);
  auto e = cross_validate(f.data.dataset, f.manifest, options_for(f.manifest, 8));
  for (auto &m: e.members) {
    m.scorer.config.max_epochs = 100;
    m.scorer.history.resize(std::min<std::size_t>(m.scorer.history.size(), 11));
  }
  auto curves = track_curves(e);
  for (const auto &p: curves)
    EXPECT_LE(p.epoch_pct, 10.0);
  e.members.resize(1);
  for (const auto &p: track_curves(e))
    EXPECT_EQ(p.std_pearson, 0.0);
  const auto csv = curves_to_csv(curves);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "eval_set,epoch_pct,n_members,mean_pearson,std_pearson");
}

TEST(EnsembleIoTest, SaveLoadRoundTrip) {
  const auto f = synthetic_fixture(13);
  const auto e = cross_validate(f.data.dataset, f.manifest, options_for(f.manifest, 4));
  test::TempDir dir;
  save_ensemble(e, dir / "model");
  const auto back = load_ensemble(dir / "model");
  ASSERT_EQ(back.members.size(), e.members.size());
  EXPECT_EQ(back.audit.gradient_ids, e.audit.gradient_ids);
  for (const auto &r: f.data.dataset.records()) {
    const std::vector<const ComplexRecord *> one { &r };
    EXPECT_EQ(ensemble_predict(back, one), ensemble_predict(e, one));
  }
}

}  // namespace
}  // namespace oodscore
