//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "oodscore/csv.h"
#include "oodscore/errors.h"

namespace oodscore {

double pearson(std::span<const double> predicted,
               std::span<const double> actual) {
  if (predicted.size() != actual.size())
    throw ValidationError("pearson: length mismatch");
  const std::size_t n = predicted.size();
  if (n < 2)
    throw ValidationError("pearson: need at least 2 points");

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += predicted[i];
    my += actual[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = predicted[i] - mx, dy = actual[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0)
    throw UndefinedMetricError("pearson: zero variance input");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size())
    throw ValidationError("rmse: length mismatch");
  if (predicted.empty())
    throw ValidationError("rmse: empty input");
  double s = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(predicted.size()));
}

std::string_view to_string(DecoyKind kind) {
  switch (kind) {
  case DecoyKind::kNativePose:
    return "native_pose";
  case DecoyKind::kDecoyPose:
    return "decoy_pose";
  case DecoyKind::kActive:
    return "active";
  case DecoyKind::kInactive:
    return "inactive";
  }
  return "?";
}

DecoyKind parse_decoy_kind(std::string_view text) {
  if (text == "native_pose")
    return DecoyKind::kNativePose;
  if (text == "decoy_pose")
    return DecoyKind::kDecoyPose;
  if (text == "active")
    return DecoyKind::kActive;
  if (text == "inactive")
    return DecoyKind::kInactive;
  throw ValidationError("unknown decoy kind '" + std::string(text) + "'");
}

std::vector<DecoySet> read_decoy_csv(const std::filesystem::path &path) {
  const CsvTable table = read_csv_file(path);
  const std::string src = path.string();
  const std::size_t ct = table.require_column("target_id", src),
                    ce = table.require_column("entry_id", src),
                    ck = table.require_column("kind", src);
  const auto cs = table.column("score"), cr = table.column("rmsd");

  std::vector<DecoySet> sets;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto &row = table.rows[i];
    const std::string where = src + ":" + std::to_string(table.line_numbers[i]);
    DecoyEntry e;
    e.entry_id = row[ce];
    try {
      e.kind = parse_decoy_kind(row[ck]);
    } catch (const ValidationError &err) {
      throw ValidationError(where + ": " + err.what());
    }
    if (cs && !row[*cs].empty()) {
      e.score = parse_double(row[*cs]);
      if (!e.score)
        throw ValidationError(where + ": malformed score '" + row[*cs] + "'");
    }
    if (cr && !row[*cr].empty()) {
      e.rmsd_to_native = parse_double(row[*cr]);
      if (!e.rmsd_to_native || *e.rmsd_to_native < 0)
        throw ValidationError(where + ": malformed rmsd '" + row[*cr] + "'");
    }
    auto [it, inserted] = index.emplace(row[ct], sets.size());
    if (inserted)
      sets.push_back({ row[ct], {} });
    sets[it->second].entries.push_back(std::move(e));
  }
  return sets;
}

namespace {
// Entries ordered best first: score descending, entry_id ascending.
std::vector<const DecoyEntry *> rank_entries(const DecoySet &set) {
  std::vector<const DecoyEntry *> ranked;
  ranked.reserve(set.entries.size());
  for (const auto &e: set.entries) {
    if (!e.score || !std::isfinite(*e.score)) {
      throw ValidationError("decoy set " + set.target_id + ": entry "
                            + e.entry_id + " has no finite score");
    }
    ranked.push_back(&e);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const DecoyEntry *a, const DecoyEntry *b) {
              if (*a->score != *b->score)
                return *a->score > *b->score;
              return a->entry_id < b->entry_id;
            });
  return ranked;
}
}  // namespace

double docking_success_rate(std::span<const DecoySet> sets,
                            const DockingOptions &options) {
  if (sets.empty())
    throw ValidationError("docking_success_rate: no decoy sets");
  if (options.top_n < 1)
    throw ValidationError("docking_success_rate: top_n must be >= 1");
  if (!(options.rmsd_cutoff >= 0))
    throw ValidationError("docking_success_rate: rmsd_cutoff must be >= 0");

  std::size_t successes = 0;
  for (const auto &set: sets) {
    if (set.entries.empty())
      throw ValidationError("decoy set " + set.target_id + " is empty");
    const auto ranked = rank_entries(set);
    const std::size_t top =
        std::min<std::size_t>(static_cast<std::size_t>(options.top_n),
                              ranked.size());
    for (std::size_t i = 0; i < top; ++i) {
      const DecoyEntry &e = *ranked[i];
      double rmsd;
      if (e.rmsd_to_native) {
        rmsd = *e.rmsd_to_native;
      } else if (e.kind == DecoyKind::kNativePose) {
        rmsd = 0.0;
      } else {
        throw ValidationError("decoy set " + set.target_id + ": pose "
                              + e.entry_id + " has no rmsd_to_native");
      }
      if (rmsd <= options.rmsd_cutoff) {
        ++successes;
        break;
      }
    }
  }
  return static_cast<double>(successes) / static_cast<double>(sets.size());
}

double enrichment_factor(const DecoySet &set, double top_fraction) {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0))
    throw ValidationError("enrichment_factor: top_fraction must be in (0,1]");
  if (set.entries.empty())
    throw ValidationError("decoy set " + set.target_id + " is empty");

  const auto ranked = rank_entries(set);
  const std::size_t n = ranked.size();
  std::size_t actives = 0;
  for (const auto *e: ranked) {
    if (e->kind == DecoyKind::kActive)
      ++actives;
    else if (e->kind != DecoyKind::kInactive)
      throw ValidationError("decoy set " + set.target_id
                            + ": screening entries must be active/inactive");
  }
  if (actives == 0)
    throw ValidationError("decoy set " + set.target_id + " has no actives");

  // The epsilon keeps e.g. 0.1 * 100 from rounding up to 11.
  auto top = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(n) - 1e-9));
  top = std::clamp<std::size_t>(top, 1, n);

  std::size_t top_actives = 0;
  for (std::size_t i = 0; i < top; ++i) {
    if (ranked[i]->kind == DecoyKind::kActive)
      ++top_actives;
  }
  return (static_cast<double>(top_actives) / static_cast<double>(top))
         / (static_cast<double>(actives) / static_cast<double>(n));
}

AggregateMetrics aggregate_pearson(std::span<const double> per_target_r) {
  if (per_target_r.empty())
    throw ValidationError("aggregate_pearson: no targets");
  AggregateMetrics agg;
  agg.avg_pearson = std::accumulate(per_target_r.begin(), per_target_r.end(),
                                    0.0)
                    / static_cast<double>(per_target_r.size());
  agg.min_pearson = *std::min_element(per_target_r.begin(), per_target_r.end());
  return agg;
}

DockingSummary summarize_docking(std::span<const DecoySet> sets,
                                 const DockingOptions &options) {
  return { options, sets.size(), docking_success_rate(sets, options) };
}

ScreeningSummary summarize_screening(std::span<const DecoySet> sets,
                                     std::span<const double> fractions) {
  if (sets.empty())
    throw ValidationError("summarize_screening: no decoy sets");
  ScreeningSummary s;
  s.fractions.assign(fractions.begin(), fractions.end());
  s.mean_ef.assign(fractions.size(), 0.0);
  for (const auto &set: sets) {
    auto &efs = s.per_target[set.target_id];
    for (std::size_t f = 0; f < fractions.size(); ++f) {
      efs.push_back(enrichment_factor(set, fractions[f]));
      s.mean_ef[f] += efs.back();
    }
  }
  for (auto &m: s.mean_ef)
    m /= static_cast<double>(sets.size());
  return s;
}

MetricReport
build_report(const TargetPredictions &predictions, const Dataset &labels,
             const std::map<std::string, std::vector<std::string>> &expected_ids) {
  MetricReport report;
  std::vector<double> rs;
  for (const auto &[target, ids]: expected_ids) {
    auto pit = predictions.find(target);
    if (pit == predictions.end())
      throw ValidationError("no predictions for target " + target);
    const auto &pred = pit->second;

    std::vector<std::string> missing;
    std::vector<double> p, y;
    for (const auto &id: ids) {
      auto it = pred.find(id);
      if (it == pred.end()) {
        missing.push_back(id);
        continue;
      }
      p.push_back(it->second);
      y.push_back(labels.at(id).label.pk_value);
    }
    std::vector<std::string> extra;
    if (pred.size() != p.size()) {
      std::vector<std::string> sorted_ids(ids);
      std::sort(sorted_ids.begin(), sorted_ids.end());
      for (const auto &[id, _]: pred) {
        if (!std::binary_search(sorted_ids.begin(), sorted_ids.end(), id))
          extra.push_back(id);
      }
    }
    if (!missing.empty() || !extra.empty()) {
      std::ostringstream msg;
      msg << "target " << target << ": predictions do not cover the test set;";
      if (!missing.empty()) {
        msg << " missing";
        for (const auto &id: missing)
          msg << ' ' << id;
        msg << ';';
      }
      if (!extra.empty()) {
        msg << " unexpected";
        for (const auto &id: extra)
          msg << ' ' << id;
      }
      throw ValidationError(msg.str());
    }

    TargetMetrics m;
    try {
      m.pearson_r = pearson(p, y);
    } catch (const Error &e) {
      throw UndefinedMetricError("target " + target + ": " + e.what());
    }
    m.rmse = rmse(p, y);
    m.n = p.size();
    rs.push_back(m.pearson_r);
    report.per_target.emplace(target, m);
  }
  report.aggregate = aggregate_pearson(rs);
  return report;
}

nlohmann::json to_json(const MetricReport &report) {
  nlohmann::json per_target = nlohmann::json::object();
  for (const auto &[target, m]: report.per_target) {
    per_target[target] = {
      { "pearson_r", m.pearson_r },
      { "rmse", m.rmse },
      { "n", m.n },
    };
  }
  nlohmann::json doc = {
    { "test_set", report.test_set },
    { "per_target", per_target },
    { "aggregate",
     { { "avg_pearson", report.aggregate.avg_pearson },
        { "min_pearson", report.aggregate.min_pearson } } },
    { "excluded_ids", report.excluded_ids },
  };
  if (report.docking) {
    doc["docking"] = {
      { "rmsd_cutoff", report.docking->options.rmsd_cutoff },
      { "top_n", report.docking->options.top_n },
      { "n_targets", report.docking->n_targets },
      { "success_rate", report.docking->success_rate },
    };
  }
  if (report.screening) {
    doc["screening"] = {
      { "fractions", report.screening->fractions },
      { "per_target", report.screening->per_target },
      { "mean_ef", report.screening->mean_ef },
    };
  }
  return doc;
}

std::string to_csv(const MetricReport &report) {
  std::ostringstream os;
  os << "target,n,pearson_r,rmse\n";
  for (const auto &[target, m]: report.per_target) {
    os << csv_escape(target) << ',' << m.n << ',' << format_double(m.pearson_r)
       << ',' << format_double(m.rmse) << '\n';
  }
  os << "Avg,," << format_double(report.aggregate.avg_pearson) << ",\n";
  os << "Min,," << format_double(report.aggregate.min_pearson) << ",\n";
  return os.str();
}

}  // namespace oodscore
