//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/config.h"

#include <gtest/gtest.h>

#include "oodscore/errors.h"
#include "support.h"

namespace oodscore {
namespace {

class ConfigTest : public ::testing::Test {
protected:
  void SetUp() override {
    test::write_text(dir_ / "table.csv", "complex_id,cluster_id,pk\n");
    test::write_text(dir_ / "emb.csv", "complex_id,v0\n");
  }

  nlohmann::json minimal() const {
    return { { "schema_version", 1 },
             { "seed", 7 },
             { "data", { { "complex_table", "table.csv" } } } };
  }

  std::string error_of(const nlohmann::json &doc) const {
    try {
      run_config_from_json(doc, dir_.path());
    } catch (const ValidationError &e) {
      return e.what();
    }
    return "";
  }

  test::TempDir dir_;
};

TEST_F(ConfigTest, MinimalDefaults) {
  const auto c = run_config_from_json(minimal(), dir_.path());
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.scorer.seed, 7u);
  EXPECT_EQ(c.data.complex_table, dir_ / "table.csv");
  EXPECT_EQ(c.split.k, 5);
  EXPECT_EQ(c.split.n_holdout, 25);
  EXPECT_FALSE(c.split.clean.enabled);
  EXPECT_EQ(c.evaluation.test_set, "auto");
  EXPECT_EQ(c.evaluation.docking.rmsd_cutoff, 2.0);
  EXPECT_EQ(c.evaluation.docking.top_n, 1);
  EXPECT_EQ(c.projection.perplexity, 30.0);
  EXPECT_EQ(c.finetune.finetune_epochs, 25);
}

TEST_F(ConfigTest, ExplicitScorerSeedWins) {
  auto doc = minimal();
  doc["scorer"] = { { "seed", 99 } };
  EXPECT_EQ(run_config_from_json(doc, dir_.path()).scorer.seed, 99u);
}

TEST_F(ConfigTest, FullDocumentParses) {
  auto doc = minimal();
  doc["data"]["interaction_embeddings"] = "emb.csv";
  doc["data"]["embedding_dim"] = 1;
  doc["split"] = { { "targets", { { "T1", "C001" } } },
                   { "k", 3 },
                   { "clean", { { "enabled", true }, { "rule", "any" },
                                { "thresholds", { { "ligand", 0.5 } } } } } };
  doc["training"] = { { "target", "T1" } };
  doc["evaluation"] = { { "test_set", "full" }, { "ef_fractions", { 0.1 } } };
  doc["projection"] = { { "colorings", { "cluster_highlight" } },
                        { "highlight_clusters", { "C001" } } };
  const auto c = run_config_from_json(doc, dir_.path());
  EXPECT_EQ(c.split.targets.at("T1"), "C001");
  EXPECT_EQ(c.split.clean.rule, CleanRule::kAny);
  EXPECT_EQ(c.split.clean.thresholds.ligand, 0.5);
  EXPECT_EQ(c.split.clean.thresholds.pose, 0.9);
  EXPECT_EQ(*c.training.target, "T1");
  EXPECT_EQ(c.evaluation.ef_fractions, std::vector<double> { 0.1 });
  EXPECT_EQ(c.projection.colorings, std::vector<Coloring> { Coloring::kClusterHighlight });
  EXPECT_EQ(*c.data.interaction_embeddings, dir_ / "emb.csv");

  const auto canon = to_json(c);
  EXPECT_EQ(to_json(run_config_from_json(canon, "/")).dump(), canon.dump());
}

TEST_F(ConfigTest, ErrorsNameKeyPaths) {
  auto doc = minimal();
  doc["split"] = { { "clean", { { "rul", "any" } } } };
  EXPECT_NE(error_of(doc).find("split.clean.rul"), std::string::npos) << error_of(doc);

  doc = minimal();
  doc["scorer"] = { { "hiden_sizes", { 4 } } };
  EXPECT_NE(error_of(doc).find("scorer.hiden_sizes"), std::string::npos) << error_of(doc);

  doc = minimal();
  doc["split"] = { { "k", "five" } };
  EXPECT_NE(error_of(doc).find("split.k"), std::string::npos) << error_of(doc);

  doc = minimal();
  doc["bogus"] = 1;
  EXPECT_NE(error_of(doc).find("bogus"), std::string::npos);

  doc = minimal();
  doc["data"]["similarity"] = "nope.csv";
  EXPECT_NE(error_of(doc).find("nope.csv"), std::string::npos) << error_of(doc);

  doc = minimal();
  doc.erase("schema_version");
  EXPECT_NE(error_of(doc).find("schema_version"), std::string::npos);
  doc["schema_version"] = 2;
  EXPECT_NE(error_of(doc).find("schema_version"), std::string::npos);

  doc = minimal();
  doc.erase("data");
  EXPECT_NE(error_of(doc).find("data"), std::string::npos);

  doc = minimal();
  doc["training"] = { { "target", "T9" } };
  EXPECT_NE(error_of(doc).find("training.target"), std::string::npos);

  doc = minimal();
  doc["projection"] = { { "plot_format", "png" } };
  EXPECT_NE(error_of(doc).find("projection.plot_format"), std::string::npos);

  doc = minimal();
  doc["evaluation"] = { { "test_set", "partial" } };
  EXPECT_NE(error_of(doc).find("evaluation.test_set"), std::string::npos);
}

TEST_F(ConfigTest, LoadFromFile) {
  test::write_text(dir_ / "run.json", minimal().dump());
  EXPECT_EQ(load_run_config(dir_ / "run.json").seed, 7u);
  test::write_text(dir_ / "broken.json", "{ \"seed\": ");
  EXPECT_THROW(load_run_config(dir_ / "broken.json"), ValidationError);
  EXPECT_THROW(load_run_config(dir_ / "absent.json"), ValidationError);
}

}  // namespace
}  // namespace oodscore
