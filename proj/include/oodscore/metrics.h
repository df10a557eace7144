//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_METRICS_H_
#define OODSCORE_METRICS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oodscore/dataset.h"

namespace oodscore {

// Sample Pearson correlation. Requires equal lengths >= 2 and nonzero
// variance in both inputs; otherwise throws (UndefinedMetricError for zero
// variance, ValidationError for bad lengths).
double pearson(std::span<const double> predicted,
               std::span<const double> actual);

// Root mean squared difference. Requires equal non-zero lengths.
double rmse(std::span<const double> predicted, std::span<const double> actual);

enum class DecoyKind { kNativePose, kDecoyPose, kActive, kInactive };

std::string_view to_string(DecoyKind kind);
DecoyKind parse_decoy_kind(std::string_view text);

struct DecoyEntry {
  std::string entry_id;
  DecoyKind kind = DecoyKind::kDecoyPose;
  std::optional<double> score;           // higher is better
  std::optional<double> rmsd_to_native;  // Angstrom
};

struct DecoySet {
  std::string target_id;
  std::vector<DecoyEntry> entries;
};

// "target_id,entry_id,kind,score,rmsd" with score and rmsd optional (empty
// fields). Sets are returned in order of first appearance.
std::vector<DecoySet> read_decoy_csv(const std::filesystem::path &path);

struct DockingOptions {
  double rmsd_cutoff = 2.0;
  int top_n = 1;
};

// Fraction of targets for which at least one of the top_n highest scoring
// poses lies within rmsd_cutoff of the native pose. Score ties are broken by
// entry_id in lexicographic order. Native poses without an RMSD count as 0 A.
double docking_success_rate(std::span<const DecoySet> sets,
                            const DockingOptions &options = {});

// (actives among the top ceil(fraction * N) / that count) / (actives / N).
double enrichment_factor(const DecoySet &set, double top_fraction);

inline const std::vector<double> &default_ef_fractions() {
  static const std::vector<double> fractions { 0.005, 0.01, 0.05, 0.10 };
  return fractions;
}

struct TargetMetrics {
  double pearson_r = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

struct AggregateMetrics {
  double avg_pearson = 0.0;
  double min_pearson = 0.0;
};

AggregateMetrics aggregate_pearson(std::span<const double> per_target_r);

struct DockingSummary {
  DockingOptions options;
  std::size_t n_targets = 0;
  double success_rate = 0.0;
};

struct ScreeningSummary {
  std::vector<double> fractions;
  // target -> EF per fraction (same order as `fractions`)
  std::map<std::string, std::vector<double>> per_target;
  std::vector<double> mean_ef;
};

DockingSummary summarize_docking(std::span<const DecoySet> sets,
                                 const DockingOptions &options);
ScreeningSummary summarize_screening(std::span<const DecoySet> sets,
                                     std::span<const double> fractions);

struct MetricReport {
  std::string test_set;  // "full" or "reduced"
  std::map<std::string, TargetMetrics> per_target;
  AggregateMetrics aggregate;
  // Reporting ids that could not be scored (no embedding), per target.
  std::map<std::string, std::vector<std::string>> excluded_ids;
  std::optional<DockingSummary> docking;
  std::optional<ScreeningSummary> screening;
};

using TargetPredictions = std::map<std::string, std::map<std::string, double>>;

// Computes per-target Pearson/RMSE against dataset labels. Predictions must
// cover exactly `expected_ids[target]` for every target; missing or extra
// ids raise a ValidationError listing them.
MetricReport
build_report(const TargetPredictions &predictions, const Dataset &labels,
             const std::map<std::string, std::vector<std::string>> &expected_ids);

nlohmann::json to_json(const MetricReport &report);
// target,n,pearson_r,rmse with trailing avg/min rows.
std::string to_csv(const MetricReport &report);

}  // namespace oodscore

#endif  // OODSCORE_METRICS_H_
