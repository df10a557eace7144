//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_SCORER_H_
#define OODSCORE_SCORER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodscore/dataset.h"
#include "oodscore/mlp.h"

namespace oodscore {

enum class ScorerKind {
  kEmbeddingMlp,  // interaction embedding only
  kFusion,        // ligand embedding followed by interaction embedding
};

std::string_view to_string(ScorerKind kind);
ScorerKind parse_scorer_kind(std::string_view text);

// Architecture and optimisation settings. The defaults are a reasonable
// starting point, not values anyone published.
struct ScorerConfig {
  ScorerKind kind = ScorerKind::kEmbeddingMlp;
  std::vector<std::size_t> hidden_sizes { 64, 32 };
  Activation activation = Activation::kRelu;
  double dropout_rate = 0.1;
  double learning_rate = 1e-3;
  int max_epochs = 200;
  int patience = 20;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const ScorerConfig &config);
// Rejects unknown keys; missing keys keep their defaults.
ScorerConfig scorer_config_from_json(const nlohmann::json &doc,
                                     ScorerConfig defaults = {});

bool has_required_embeddings(const ComplexRecord &record, ScorerKind kind);

// Throws MissingEmbeddingError naming the record when an embedding needed by
// `kind` is absent.
std::vector<double> build_features(const ComplexRecord &record,
                                   ScorerKind kind);

// Per-dimension z-scoring. Constant dimensions get a unit scale so they map
// to zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const FeatureMatrix &x);
  void apply(FeatureMatrix &x) const;
};

struct EpochRecord {
  int epoch = 0;              // 0 is the state before any update
  double train_loss = 0.0;    // mean squared error on pK
  double val_pearson = 0.0;   // NaN when undefined
  double val_rmse = 0.0;
  std::map<std::string, double> eval_pearson;  // NaN when undefined
};

enum class StopMetric { kPearson, kRmse };

struct TrainedScorer {
  ScorerConfig config;
  std::size_t input_dimension = 0;
  Standardizer standardizer;
  Mlp network;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  StopMetric stop_metric = StopMetric::kPearson;

  const EpochRecord &best_record() const;
  double predict_one(const ComplexRecord &record) const;
};

// Ids touched by a training run, split by how they were used.
struct AccessAudit {
  std::set<std::string> gradient_ids;
  std::set<std::string> validation_ids;
  std::set<std::string> eval_ids;

  void merge(const AccessAudit &other);
};

struct EvalSet {
  std::string name;
  std::vector<const ComplexRecord *> records;
};

struct FitOptions {
  // Scored every epoch for training curves; never used for gradients.
  std::vector<EvalSet> eval_sets;
  // Warm start: copies the network and keeps its standardizer.
  const TrainedScorer *initial = nullptr;
  // When false every epoch runs and the final parameters are returned.
  bool early_stopping = true;
  // Overrides config.learning_rate; zero is allowed here (no-op updates).
  std::optional<double> learning_rate;
  AccessAudit *audit = nullptr;
};

using RecordSpan = std::span<const ComplexRecord *const>;

// A freshly initialised scorer whose standardizer is fit on `train`. The
// output bias starts at the mean training label.
TrainedScorer make_initial_scorer(RecordSpan train, const ScorerConfig &config);

// Minimises mean squared error on pK with Adam. With early stopping the run
// ends once the validation metric (Pearson, or RMSE when the validation
// labels are constant) has not improved for `patience` epochs, and the
// parameters of the best epoch are returned.
TrainedScorer fit(RecordSpan train, RecordSpan validation,
                  const ScorerConfig &config, const FitOptions &options = {});

std::map<std::string, double> predict(const TrainedScorer &model,
                                      RecordSpan records);

std::string serialize_scorer(const TrainedScorer &model);
TrainedScorer deserialize_scorer(std::string_view bytes);
void save_scorer(const TrainedScorer &model, const std::filesystem::path &path);
TrainedScorer load_scorer(const std::filesystem::path &path);

}  // namespace oodscore

#endif  // OODSCORE_SCORER_H_
