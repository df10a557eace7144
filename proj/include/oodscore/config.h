//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_CONFIG_H_
#define OODSCORE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodscore/embedding_space.h"
#include "oodscore/metrics.h"
#include "oodscore/scorer.h"
#include "oodscore/split.h"
#include "oodscore/trainer.h"

namespace oodscore {

struct DataConfig {
  std::filesystem::path complex_table;
  std::optional<std::filesystem::path> interaction_embeddings;
  std::optional<std::filesystem::path> ligand_embeddings;
  std::size_t embedding_dim = 32;
  std::size_t ligand_dim = 8;
  std::optional<std::filesystem::path> similarity;
  // Extra CleanSplit reference ids (one per line or a complex_id column).
  std::optional<std::filesystem::path> clean_reference_ids;
  std::optional<std::filesystem::path> docking_decoys;
  std::optional<std::filesystem::path> screening_decoys;
};

struct CleanConfig {
  bool enabled = false;
  CleanRule rule = CleanRule::kJointAll;
  CleanThresholds thresholds;
  // Protect every target test set in addition to clean_reference_ids.
  bool include_target_tests = true;
};

struct SplitConfig {
  std::map<std::string, std::string> targets;  // name -> cluster id
  int k = 5;
  int n_bins = 10;
  int n_holdout = 25;
  CleanConfig clean;
};

struct TrainingConfig {
  std::optional<std::string> target;  // VAL / FT target
  std::size_t min_holdout_embedded = 20;
};

struct EvaluationConfig {
  // "full", "reduced" (minus the holdout) or "auto": full for SKF and
  // reduced for VAL / FT, whose models have seen the holdout.
  std::string test_set = "auto";
  DockingOptions docking;
  std::vector<double> ef_fractions = default_ef_fractions();
};

struct ProjectionConfig {
  double perplexity = 30.0;
  int n_iterations = 1000;
  std::vector<Coloring> colorings { Coloring::kAffinity,
                                    Coloring::kMolecularWeight };
  std::vector<std::string> highlight_clusters;
  std::string plot_format = "svg";
};

struct RunConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;
  DataConfig data;
  SplitConfig split;
  ScorerConfig scorer;
  FinetuneConfig finetune;
  TrainingConfig training;
  EvaluationConfig evaluation;
  ProjectionConfig projection;
};

inline constexpr int kSchemaVersion = 1;

// Strict parse: unknown keys and type errors raise ValidationError naming
// the key path (e.g. "split.clean.rule"). Relative paths resolve against
// `base_dir` and must exist. The scorer seed defaults to the run seed.
RunConfig run_config_from_json(const nlohmann::json &doc,
                               const std::filesystem::path &base_dir);
RunConfig load_run_config(const std::filesystem::path &path);

// Canonical form with absolute paths; its dump is what gets hashed.
nlohmann::json to_json(const RunConfig &config);

}  // namespace oodscore

#endif  // OODSCORE_CONFIG_H_
