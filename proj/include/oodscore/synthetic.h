//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_SYNTHETIC_H_
#define OODSCORE_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodscore/dataset.h"
#include "oodscore/trainer.h"

namespace oodscore {

enum class LabelModel {
  // pk = w.e + b + noise for every cluster.
  kGlobalLinear,
  // As global_linear, but OOD clusters use w + m * delta_c with a random
  // per-cluster direction delta_c of the same scale as w.
  kPerClusterShift,
  // Two label directions: a high-variance one learned early and a
  // low-variance one learned late. OOD clusters flip the sign of the late
  // direction (scaled by m), so their Pearson peaks mid-training.
  kMidTrainingPeakSurrogate,
};

std::string_view to_string(LabelModel model);
LabelModel parse_label_model(std::string_view text);

struct GeneratorSpec {
  int n_clusters = 10;
  std::vector<int> cluster_sizes;
  std::size_t embedding_dim = 32;
  std::size_t ligand_dim = 8;  // 0 disables ligand embeddings
  LabelModel label_model = LabelModel::kGlobalLinear;
  double noise_std = 0.1;
  double ood_shift_magnitude = 0.0;
  std::uint64_t seed = 0;
  // Indices of the OOD clusters; empty means the last cluster.
  std::vector<int> ood_clusters;
  double center_scale = 1.0;
  double within_scale = 1.0;
  double intercept = 6.0;
  // Surrogate only: std of the late direction and its label weight.
  double slow_scale = 0.15;
  double slow_weight = 4.0;

  void validate() const;
  std::vector<int> resolved_ood_clusters() const;
};

nlohmann::json to_json(const GeneratorSpec &spec);
GeneratorSpec generator_spec_from_json(const nlohmann::json &doc);

// Ground-truth descriptor of a generated dataset.
struct GroundTruth {
  LabelModel label_model = LabelModel::kGlobalLinear;
  std::vector<double> weights;  // in-distribution law
  double intercept = 0.0;
  double noise_std = 0.0;
  std::vector<std::string> cluster_ids;
  std::vector<std::string> ood_cluster_ids;
  std::map<std::string, std::vector<double>> cluster_weights;

  bool is_ood(const std::string &cluster_id) const;
  // Noiseless label under the record's own cluster law.
  double noiseless_label(const ComplexRecord &record) const;
  // Prediction of the optimal in-distribution predictor (w.e + b).
  double global_prediction(const ComplexRecord &record) const;
};

nlohmann::json to_json(const GroundTruth &truth);

struct SyntheticData {
  Dataset dataset;
  GroundTruth truth;
};

SyntheticData generate(const GeneratorSpec &spec);

// Writes complex_table.csv, interaction.csv and (if present) ligand.csv in
// the ingestion formats, plus truth.json.
void write_synthetic_files(const SyntheticData &data,
                           const std::filesystem::path &dir);

// Pearson between the in-distribution optimal predictor and the actual
// labels of `records`: the best any model trained on in-distribution data
// can be expected to reach.
double oracle_pearson(const GroundTruth &truth, RecordSpan records);

struct BehaviorThresholds {
  // The gap is only required when ood_shift_magnitude exceeds this.
  double shift_threshold = 1.0;
  double min_gap = 0.2;
  double min_id_pearson = 0.95;
};

struct BehaviorCheck {
  bool required = false;
  bool passed = false;
  double id_pearson = 0.0;
  double ood_pearson = 0.0;
  std::string diagnostics;
};

// In-distribution vs OOD scoring power of a trained ensemble.
BehaviorCheck expected_behavior_check(const TrainedEnsemble &ensemble,
                                      double ood_shift_magnitude,
                                      RecordSpan id_records,
                                      RecordSpan ood_records,
                                      const BehaviorThresholds &thresholds = {});

}  // namespace oodscore

#endif  // OODSCORE_SYNTHETIC_H_
