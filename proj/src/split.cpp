//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/split.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include "oodscore/errors.h"
#include "oodscore/rng.h"

namespace oodscore {

bool SplitManifest::has_holdouts() const {
  return std::any_of(targets.begin(), targets.end(), [](const auto &kv) {
    return !kv.second.holdout_ids.empty();
  });
}

const TargetSplit &SplitManifest::target(const std::string &name) const {
  auto it = targets.find(name);
  if (it == targets.end())
    throw ValidationError("unknown target " + name);
  return it->second;
}

std::vector<std::string>
SplitManifest::reporting_test_ids(const std::string &name) const {
  const TargetSplit &t = target(name);
  std::vector<std::string> out;
  std::set_difference(t.test_ids.begin(), t.test_ids.end(),
                      t.holdout_ids.begin(), t.holdout_ids.end(),
                      std::back_inserter(out));
  return out;
}

std::vector<std::string> SplitManifest::fold_ids(int fold) const {
  std::vector<std::string> out;
  for (const auto &[id, f]: fold_assignment) {
    if (f == fold)
      out.push_back(id);
  }
  return out;
}

std::vector<std::string> SplitManifest::ids_outside_fold(int fold) const {
  std::vector<std::string> out;
  for (const auto &[id, f]: fold_assignment) {
    if (f != fold)
      out.push_back(id);
  }
  return out;
}

void SplitManifest::validate(const Dataset *dataset) const {
  std::set<std::string> seen;
  auto claim = [&](const std::string &id, const std::string &where) {
    if (!seen.insert(id).second)
      throw ValidationError("split manifest: id " + id + " appears twice ("
                            + where + ")");
  };
  for (const auto &[name, t]: targets) {
    for (const auto &id: t.test_ids)
      claim(id, "test set " + name);
    if (!t.holdout_ids.empty()
        && t.holdout_ids.size() != static_cast<std::size_t>(n_holdout)) {
      throw ValidationError("split manifest: target " + name + " holdout has "
                            + std::to_string(t.holdout_ids.size())
                            + " ids, expected " + std::to_string(n_holdout));
    }
    for (const auto &id: t.holdout_ids) {
      if (!std::binary_search(t.test_ids.begin(), t.test_ids.end(), id))
        throw ValidationError("split manifest: holdout id " + id
                              + " not in test set " + name);
    }
  }
  for (const auto &id: train_val_ids)
    claim(id, "train_val");
  for (const auto &id: clean_excluded_ids)
    claim(id, "clean_excluded");

  if (has_holdouts()) {
    for (const auto &[name, t]: targets) {
      if (t.holdout_ids.empty())
        throw ValidationError("split manifest: target " + name
                              + " has no holdout");
    }
  }

  if (has_folds()) {
    if (fold_assignment.size() != train_val_ids.size())
      throw ValidationError("split manifest: fold assignment does not cover "
                            "train_val exactly");
    std::vector<bool> covered(static_cast<std::size_t>(std::max(k, 0)), false);
    for (const auto &[id, f]: fold_assignment) {
      if (!std::binary_search(train_val_ids.begin(), train_val_ids.end(), id))
        throw ValidationError("split manifest: fold id " + id
                              + " not in train_val");
      if (f < 0 || f >= k)
        throw ValidationError("split manifest: fold index out of range for "
                              + id);
      covered[static_cast<std::size_t>(f)] = true;
    }
    if (std::find(covered.begin(), covered.end(), false) != covered.end())
      throw ValidationError("split manifest: some fold is empty");
  }

  if (dataset != nullptr) {
    std::set<std::string> test_clusters;
    for (const auto &[name, t]: targets) {
      for (const auto &id: t.test_ids)
        test_clusters.insert(dataset->at(id).cluster_id);
    }
    for (const auto &id: train_val_ids) {
      const auto &c = dataset->at(id).cluster_id;
      if (test_clusters.contains(c))
        throw ValidationError("split manifest: train id " + id
                              + " shares cluster " + c + " with a test set");
    }
    if (seen.size() != dataset->size())
      throw ValidationError("split manifest does not partition the dataset");
    for (const auto &r: dataset->records()) {
      if (!seen.contains(r.complex_id))
        throw ValidationError("split manifest: id " + r.complex_id
                              + " is unassigned");
    }
  }
}

nlohmann::json to_json(const SplitManifest &m) {
  nlohmann::json targets = nlohmann::json::object();
  for (const auto &[name, t]: m.targets) {
    targets[name] = {
      { "cluster_id", t.cluster_id },
      { "test_ids", t.test_ids },
      { "holdout_ids", t.holdout_ids },
    };
  }
  return {
    { "seed", m.seed },
    { "k", m.k },
    { "n_holdout", m.n_holdout },
    { "targets", targets },
    { "train_val",
     { { "ids", m.train_val_ids }, { "folds", m.fold_assignment } } },
    { "clean_excluded", m.clean_excluded_ids },
  };
}

SplitManifest split_manifest_from_json(const nlohmann::json &doc) {
  SplitManifest m;
  try {
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.k = doc.at("k").get<int>();
    m.n_holdout = doc.at("n_holdout").get<int>();
    for (const auto &[name, t]: doc.at("targets").items()) {
      TargetSplit ts;
      ts.cluster_id = t.at("cluster_id").get<std::string>();
      ts.test_ids = t.at("test_ids").get<std::vector<std::string>>();
      ts.holdout_ids = t.at("holdout_ids").get<std::vector<std::string>>();
      m.targets.emplace(name, std::move(ts));
    }
    m.train_val_ids = doc.at("train_val").at("ids").get<std::vector<std::string>>();
    m.fold_assignment =
        doc.at("train_val").at("folds").get<std::map<std::string, int>>();
    m.clean_excluded_ids =
        doc.at("clean_excluded").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("malformed split manifest: ") + e.what());
  }
  m.validate();
  return m;
}

void save_split_manifest(const SplitManifest &manifest,
                         const std::filesystem::path &path) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs)
    throw Error("cannot write " + path.string());
  ofs << to_json(manifest).dump(1) << '\n';
}

SplitManifest load_split_manifest(const std::filesystem::path &path) {
  std::ifstream ifs(path, std::ios::binary);
  if (!ifs)
    throw PrerequisiteError("cannot open split manifest " + path.string());
  try {
    return split_manifest_from_json(nlohmann::json::parse(ifs));
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SplitManifest
build_ood_split(const Dataset &dataset,
                const std::map<std::string, std::string> &target_clusters,
                std::uint64_t seed) {
  const auto clusters = dataset.clusters();
  std::map<std::string, std::string> cluster_owner;
  SplitManifest m;
  m.seed = seed;
  for (const auto &[name, cluster]: target_clusters) {
    auto it = clusters.find(cluster);
    if (it == clusters.end())
      throw ValidationError("target " + name + ": unknown cluster_id "
                            + cluster);
    auto [owner, fresh] = cluster_owner.emplace(cluster, name);
    if (!fresh)
      throw ValidationError("targets " + owner->second + " and " + name
                            + " name the same cluster " + cluster);
    m.targets[name] = TargetSplit { cluster, it->second, {} };
  }
  for (const auto &r: dataset.records()) {
    if (!cluster_owner.contains(r.cluster_id))
      m.train_val_ids.push_back(r.complex_id);
  }
  std::sort(m.train_val_ids.begin(), m.train_val_ids.end());
  return m;
}

std::string_view to_string(CleanRule rule) {
  return rule == CleanRule::kJointAll ? "joint_all" : "any";
}

CleanRule parse_clean_rule(std::string_view text) {
  if (text == "joint_all")
    return CleanRule::kJointAll;
  if (text == "any")
    return CleanRule::kAny;
  throw ValidationError("unknown clean rule '" + std::string(text)
                        + "' (expected joint_all or any)");
}

CleanFilterResult apply_clean_filter(const SplitManifest &manifest,
                                     std::span<const SimilarityRecord> records,
                                     std::span<const std::string> reference_ids,
                                     const CleanThresholds &thresholds,
                                     CleanRule rule) {
  for (double t: { thresholds.ligand, thresholds.pose, thresholds.pocket }) {
    if (!(t >= 0.0 && t <= 1.0))
      throw ValidationError("clean filter thresholds must lie in [0,1]");
  }

  const std::set<std::string, std::less<>> reference(reference_ids.begin(),
                                                     reference_ids.end());
  const std::set<std::string, std::less<>> train(manifest.train_val_ids.begin(),
                                                 manifest.train_val_ids.end());
  std::set<std::string, std::less<>> known(train);
  known.insert(manifest.clean_excluded_ids.begin(),
               manifest.clean_excluded_ids.end());
  for (const auto &[_, t]: manifest.targets)
    known.insert(t.test_ids.begin(), t.test_ids.end());

  auto violates = [&](const SimilarityRecord &s) {
    const bool lig = s.ligand_similarity >= thresholds.ligand;
    const bool pose = s.pose_similarity >= thresholds.pose;
    const bool pocket = s.pocket_similarity >= thresholds.pocket;
    return rule == CleanRule::kJointAll ? (lig && pose && pocket)
                                        : (lig || pose || pocket);
  };

  CleanFilterResult result;
  std::set<std::string> excluded;
  // A protected complex is trivially identical to itself.
  for (const auto &id: reference) {
    if (train.contains(id))
      excluded.insert(id);
  }

  for (const auto &s: records) {
    const bool a_known = known.contains(s.id_a) || reference.contains(s.id_a);
    const bool b_known = known.contains(s.id_b) || reference.contains(s.id_b);
    if (!a_known || !b_known) {
      result.warnings.push_back("similarity record " + s.id_a + "/" + s.id_b
                                + " names an unknown id; skipped");
      continue;
    }
    if (!violates(s))
      continue;
    if (reference.contains(s.id_a) && train.contains(s.id_b))
      excluded.insert(s.id_b);
    if (reference.contains(s.id_b) && train.contains(s.id_a))
      excluded.insert(s.id_a);
  }

  SplitManifest out = manifest;
  out.train_val_ids.clear();
  for (const auto &id: manifest.train_val_ids) {
    if (!excluded.contains(id))
      out.train_val_ids.push_back(id);
  }
  for (const auto &id: excluded)
    out.fold_assignment.erase(id);
  std::set<std::string> all_excluded(manifest.clean_excluded_ids.begin(),
                                     manifest.clean_excluded_ids.end());
  all_excluded.insert(excluded.begin(), excluded.end());
  out.clean_excluded_ids.assign(all_excluded.begin(), all_excluded.end());
  result.manifest = std::move(out);
  return result;
}

SplitManifest stratified_kfold(const SplitManifest &manifest,
                               const Dataset &dataset, int k, int n_bins,
                               std::uint64_t seed) {
  if (k < 2)
    throw ValidationError("stratified_kfold: k must be >= 2");
  if (n_bins < 2)
    throw ValidationError("stratified_kfold: n_bins must be >= 2");
  if (manifest.train_val_ids.empty())
    throw ValidationError("stratified_kfold: train_val set is empty");
  if (manifest.train_val_ids.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("stratified_kfold: " +
                          std::to_string(manifest.train_val_ids.size())
                          + " train_val records is fewer than k = "
                          + std::to_string(k));
  }

  std::vector<double> labels;
  labels.reserve(manifest.train_val_ids.size());
  for (const auto &id: manifest.train_val_ids)
    labels.push_back(dataset.at(id).label.pk_value);
  const auto [lo_it, hi_it] = std::minmax_element(labels.begin(), labels.end());
  const double lo = *lo_it, width = *hi_it - *lo_it;

  std::vector<std::vector<std::string>> bins(static_cast<std::size_t>(n_bins));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int b = 0;
    if (width > 0) {
      b = static_cast<int>(std::floor((labels[i] - lo) / width * n_bins));
      b = std::clamp(b, 0, n_bins - 1);
    }
    bins[static_cast<std::size_t>(b)].push_back(manifest.train_val_ids[i]);
  }

  SplitManifest out = manifest;
  out.k = k;
  out.fold_assignment.clear();
  Rng rng(derive_seed(seed, "stratified_kfold"));
  int next = 0;
  for (auto &bin: bins) {
    std::shuffle(bin.begin(), bin.end(), rng);
    for (const auto &id: bin) {
      out.fold_assignment[id] = next;
      next = (next + 1) % k;
    }
  }
  return out;
}

SplitManifest holdout_limited(const SplitManifest &manifest, int n_holdout,
                              std::uint64_t seed) {
  if (n_holdout < 1)
    throw ValidationError("holdout_limited: n_holdout must be >= 1");
  SplitManifest out = manifest;
  out.n_holdout = n_holdout;
  for (auto &[name, t]: out.targets) {
    if (t.test_ids.size() <= static_cast<std::size_t>(n_holdout)) {
      throw ValidationError("target " + name + ": test set of "
                            + std::to_string(t.test_ids.size())
                            + " is too small for a holdout of "
                            + std::to_string(n_holdout));
    }
    std::vector<std::string> pool = t.test_ids;
    Rng rng(derive_seed(seed, "holdout:" + name));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(static_cast<std::size_t>(n_holdout));
    std::sort(pool.begin(), pool.end());
    t.holdout_ids = std::move(pool);
  }
  return out;
}

}  // namespace oodscore
