//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_SPLIT_H_
#define OODSCORE_SPLIT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodscore/dataset.h"

namespace oodscore {

struct TargetSplit {
  std::string cluster_id;
  std::vector<std::string> test_ids;     // sorted
  std::vector<std::string> holdout_ids;  // sorted subset of test_ids
};

// Train/validation/test membership for a set of held-out target clusters.
//
// Invariants (checked by validate()):
//   - target test sets, train_val_ids and clean_excluded_ids are pairwise
//     disjoint;
//   - fold_assignment keys are exactly train_val_ids and cover 0..k-1;
//   - holdouts are subsets of their test set with exactly n_holdout ids;
//   - no train_val id shares a cluster with a test id (needs the dataset).
struct SplitManifest {
  std::uint64_t seed = 0;
  int k = 5;
  int n_holdout = 25;
  std::map<std::string, TargetSplit> targets;
  std::vector<std::string> train_val_ids;  // sorted
  std::map<std::string, int> fold_assignment;
  std::vector<std::string> clean_excluded_ids;  // sorted

  bool has_folds() const { return !fold_assignment.empty(); }
  bool has_holdouts() const;

  const TargetSplit &target(const std::string &name) const;

  // Test set minus the limited-data holdout.
  std::vector<std::string> reporting_test_ids(const std::string &name) const;
  std::vector<std::string> fold_ids(int fold) const;
  std::vector<std::string> ids_outside_fold(int fold) const;

  // Throws ValidationError describing the first violated invariant.
  void validate(const Dataset *dataset = nullptr) const;
};

nlohmann::json to_json(const SplitManifest &manifest);
SplitManifest split_manifest_from_json(const nlohmann::json &doc);
void save_split_manifest(const SplitManifest &manifest,
                         const std::filesystem::path &path);
SplitManifest load_split_manifest(const std::filesystem::path &path);

// Whole-cluster holdout: every record of a target's cluster goes to that
// target's test set, all other records to train_val (both sorted by id).
SplitManifest
build_ood_split(const Dataset &dataset,
                const std::map<std::string, std::string> &target_clusters,
                std::uint64_t seed);

enum class CleanRule { kJointAll, kAny };

std::string_view to_string(CleanRule rule);
CleanRule parse_clean_rule(std::string_view text);

// Non-canonical defaults; the reference thresholds are not published here.
struct CleanThresholds {
  double ligand = 0.9;
  double pose = 0.9;
  double pocket = 0.9;
};

struct CleanFilterResult {
  SplitManifest manifest;
  std::vector<std::string> warnings;
};

// Removes from train_val every id that is similar to a reference id under
// `rule` (joint_all: all three scores >= thresholds; any: at least one).
// Reference ids found in train_val are excluded as well. Records naming ids
// unknown to both the manifest and the reference set are skipped with a
// warning. Test sets are never modified.
CleanFilterResult apply_clean_filter(const SplitManifest &manifest,
                                     std::span<const SimilarityRecord> records,
                                     std::span<const std::string> reference_ids,
                                     const CleanThresholds &thresholds,
                                     CleanRule rule = CleanRule::kJointAll);

// Label-stratified k-fold assignment: equal-width pK bins over the observed
// train_val label range, ids shuffled within each bin and dealt round-robin.
// The dealing position carries over between bins so fold sizes differ by at
// most one overall as well as per bin.
SplitManifest stratified_kfold(const SplitManifest &manifest,
                               const Dataset &dataset, int k, int n_bins,
                               std::uint64_t seed);

// Samples n_holdout ids per target test set uniformly without replacement.
// Each target uses its own stream derived from (seed, target name).
SplitManifest holdout_limited(const SplitManifest &manifest, int n_holdout,
                              std::uint64_t seed);

}  // namespace oodscore

#endif  // OODSCORE_SPLIT_H_
