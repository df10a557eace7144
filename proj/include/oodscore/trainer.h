//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_TRAINER_H_
#define OODSCORE_TRAINER_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodscore/dataset.h"
#include "oodscore/scorer.h"
#include "oodscore/split.h"

namespace oodscore {

enum class Regime {
  kSkf,  // stratified k-fold, early stopping on the held-in fold
  kVal,  // k-fold training sets, early stopping on the target holdout
  kFt,   // fine-tuned on the target holdout
};

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view text);

enum class SourceSelection { kBestValMember, kAllMembers };

std::string_view to_string(SourceSelection s);
SourceSelection parse_source_selection(std::string_view text);

struct FinetuneConfig {
  int finetune_epochs = 25;
  // Defaults to 0.1 x the base learning rate.
  std::optional<double> finetune_learning_rate;
  SourceSelection source_selection = SourceSelection::kBestValMember;

  void validate() const;
  double learning_rate(const ScorerConfig &base) const;
};

nlohmann::json to_json(const FinetuneConfig &config);
FinetuneConfig finetune_config_from_json(const nlohmann::json &doc,
                                         FinetuneConfig defaults = {});

struct EnsembleMember {
  TrainedScorer scorer;
  int fold = -1;  // held-in validation fold; -1 when not fold based
  std::vector<std::string> validation_ids;
};

struct TrainedEnsemble {
  Regime regime = Regime::kSkf;
  std::vector<EnsembleMember> members;
  std::string manifest_ref;
  std::string target;  // VAL / FT only
  // FT provenance: index of the fine-tuned SKF member(s) and the validation
  // Pearson of every source member that drove the choice.
  std::vector<int> source_members;
  std::vector<double> selection_evidence;
  AccessAudit audit;

  void validate() const;
};

struct TrainerOptions {
  ScorerConfig scorer;
  // Named id lists scored after every epoch (training curves).
  std::map<std::string, std::vector<std::string>> curve_sets;
  // VAL: fewest holdout records with usable embeddings.
  std::size_t min_holdout_embedded = 20;
  std::string manifest_ref;
};

// The target reporting sets of a manifest, keyed "test:<target>".
std::map<std::string, std::vector<std::string>>
target_curve_sets(const SplitManifest &manifest);

// One scorer per fold, each validated (and early-stopped) on its own fold and
// trained on the rest. Records without the required embeddings are dropped.
TrainedEnsemble cross_validate(const Dataset &dataset,
                               const SplitManifest &manifest,
                               const TrainerOptions &options);

// Same training sets as cross_validate (all of train_val when the manifest
// has no folds) but every member early-stops on the target's fixed holdout.
TrainedEnsemble train_with_target_validation(const Dataset &dataset,
                                             const SplitManifest &manifest,
                                             const std::string &target,
                                             const TrainerOptions &options);

// Fine-tunes the SKF member with the best own-fold validation Pearson (or
// every member) on the target holdout for a fixed number of epochs.
TrainedEnsemble finetune(const TrainedEnsemble &source, const Dataset &dataset,
                         const SplitManifest &manifest,
                         const std::string &target,
                         const FinetuneConfig &config,
                         const TrainerOptions &options);

// ensemble.json (members, provenance, audit) plus member-<i>.model files.
void save_ensemble(const TrainedEnsemble &ensemble,
                   const std::filesystem::path &dir);
TrainedEnsemble load_ensemble(const std::filesystem::path &dir);

// Arithmetic mean of member predictions.
std::map<std::string, double> ensemble_predict(const TrainedEnsemble &ensemble,
                                               RecordSpan records);

struct CurvePoint {
  std::string eval_set;
  int epoch = 0;
  double epoch_pct = 0.0;
  std::size_t n_members = 0;
  double mean_pearson = 0.0;
  double std_pearson = 0.0;  // sample std; 0 for a single member
};

// Aggregates per-epoch Pearson across the members still training at each
// epoch. "validation" refers to each member's own validation set. An empty
// name list means every tracked set.
std::vector<CurvePoint> track_curves(const TrainedEnsemble &ensemble,
                                     std::span<const std::string> eval_sets = {});

std::string curves_to_csv(std::span<const CurvePoint> curves);

}  // namespace oodscore

#endif  // OODSCORE_TRAINER_H_
