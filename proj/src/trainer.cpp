//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/trainer.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "oodscore/csv.h"
#include "oodscore/errors.h"
#include "oodscore/rng.h"

namespace oodscore {

std::string_view to_string(Regime regime) {
  switch (regime) {
  case Regime::kSkf:
    return "SKF";
  case Regime::kVal:
    return "VAL";
  case Regime::kFt:
    return "FT";
  }
  return "?";
}

Regime parse_regime(std::string_view text) {
  if (text == "SKF" || text == "skf")
    return Regime::kSkf;
  if (text == "VAL" || text == "val")
    return Regime::kVal;
  if (text == "FT" || text == "ft")
    return Regime::kFt;
  throw ValidationError("unknown regime '" + std::string(text) + "'");
}

std::string_view to_string(SourceSelection s) {
  return s == SourceSelection::kBestValMember ? "best_val_member"
                                              : "all_members";
}

SourceSelection parse_source_selection(std::string_view text) {
  if (text == "best_val_member")
    return SourceSelection::kBestValMember;
  if (text == "all_members")
    return SourceSelection::kAllMembers;
  throw ValidationError("unknown source selection '" + std::string(text) + "'");
}

void FinetuneConfig::validate() const {
  if (finetune_epochs < 1)
    throw ValidationError("finetune: finetune_epochs must be >= 1");
  if (finetune_learning_rate
      && (!(*finetune_learning_rate >= 0.0)
          || !std::isfinite(*finetune_learning_rate)))
    throw ValidationError("finetune: learning rate must be finite and >= 0");
}

double FinetuneConfig::learning_rate(const ScorerConfig &base) const {
  return finetune_learning_rate.value_or(0.1 * base.learning_rate);
}

nlohmann::json to_json(const FinetuneConfig &c) {
  return {
    { "finetune_epochs", c.finetune_epochs },
    { "finetune_learning_rate", c.finetune_learning_rate
                                    ? nlohmann::json(*c.finetune_learning_rate)
                                    : nlohmann::json(nullptr) },
    { "source_selection", to_string(c.source_selection) },
  };
}

FinetuneConfig finetune_config_from_json(const nlohmann::json &doc,
                                         FinetuneConfig c) {
  if (!doc.is_object())
    throw ValidationError("finetune config must be an object");
  for (const auto &[key, value]: doc.items()) {
    try {
      if (key == "finetune_epochs")
        c.finetune_epochs = value.get<int>();
      else if (key == "finetune_learning_rate")
        c.finetune_learning_rate = value.is_null()
                                       ? std::nullopt
                                       : std::optional(value.get<double>());
      else if (key == "source_selection")
        c.source_selection = parse_source_selection(value.get<std::string>());
      else
        throw ValidationError("unknown key");
    } catch (const nlohmann::json::exception &e) {
      throw ValidationError("finetune." + key + ": " + e.what());
    } catch (const ValidationError &e) {
      throw ValidationError("finetune." + key + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

void TrainedEnsemble::validate() const {
  if (members.empty())
    throw ValidationError("ensemble has no members");
  const auto &first = members.front().scorer;
  for (const auto &m: members) {
    if (m.scorer.config.kind != first.config.kind
        || m.scorer.input_dimension != first.input_dimension)
      throw ValidationError("ensemble members disagree on scorer kind or "
                            "input dimension");
  }
}

std::map<std::string, std::vector<std::string>>
target_curve_sets(const SplitManifest &manifest) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto &[name, _]: manifest.targets)
    out["test:" + name] = manifest.reporting_test_ids(name);
  return out;
}

namespace {
std::vector<const ComplexRecord *>
usable_records(const Dataset &dataset, std::span<const std::string> ids,
               ScorerKind kind) {
  std::vector<const ComplexRecord *> out;
  out.reserve(ids.size());
  for (const auto &id: ids) {
    const auto &r = dataset.at(id);
    if (has_required_embeddings(r, kind))
      out.push_back(&r);
  }
  return out;
}

std::vector<EvalSet> curve_eval_sets(const Dataset &dataset,
                                     const TrainerOptions &options) {
  std::vector<EvalSet> sets;
  for (const auto &[name, ids]: options.curve_sets)
    sets.push_back({ name, usable_records(dataset, ids, options.scorer.kind) });
  return sets;
}

std::uint64_t member_seed(std::uint64_t base, std::size_t index) {
  return derive_seed(base, "member", index);
}

void check_no_test_gradients(const SplitManifest &manifest,
                             const AccessAudit &audit) {
  for (const auto &[name, t]: manifest.targets) {
    for (const auto &id: t.test_ids) {
      if (audit.gradient_ids.contains(id))
        throw Error("internal: test id " + id + " of target " + name
                    + " reached a gradient batch");
    }
  }
}

// Trains one member per fold (or one on all of train_val without folds),
// validating on `fixed_validation` when given, else on the held-in fold.
TrainedEnsemble
train_members(const Dataset &dataset, const SplitManifest &manifest,
              const TrainerOptions &options,
              const std::vector<const ComplexRecord *> *fixed_validation) {
  const ScorerKind kind = options.scorer.kind;
  const auto eval_sets = curve_eval_sets(dataset, options);

  struct Plan {
    int fold;
    std::vector<std::string> train_ids;
    std::vector<std::string> val_ids;
  };
  std::vector<Plan> plans;
  if (manifest.has_folds()) {
    for (int f = 0; f < manifest.k; ++f)
      plans.push_back({ f, manifest.ids_outside_fold(f), manifest.fold_ids(f) });
  } else {
    if (fixed_validation == nullptr)
      throw ValidationError("cross-validation needs a fold assignment");
    plans.push_back({ -1, manifest.train_val_ids, {} });
  }

  TrainedEnsemble ens;
  ens.manifest_ref = options.manifest_ref;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const Plan &plan = plans[i];
    const auto train = usable_records(dataset, plan.train_ids, kind);
    std::vector<const ComplexRecord *> val;
    if (fixed_validation != nullptr)
      val = *fixed_validation;
    else
      val = usable_records(dataset, plan.val_ids, kind);
    if (train.empty() || val.empty()) {
      throw ValidationError("fold " + std::to_string(plan.fold)
                            + " is empty after embedding filtering");
    }

    ScorerConfig cfg = options.scorer;
    cfg.seed = member_seed(options.scorer.seed, i);
    AccessAudit audit;
    FitOptions fo;
    fo.eval_sets = eval_sets;
    fo.audit = &audit;

    EnsembleMember member;
    member.scorer = fit(train, val, cfg, fo);
    member.fold = plan.fold;
    for (const auto *r: val)
      member.validation_ids.push_back(r->complex_id);
    ens.audit.merge(audit);
    ens.members.push_back(std::move(member));
  }
  check_no_test_gradients(manifest, ens.audit);
  return ens;
}
}  // namespace

TrainedEnsemble cross_validate(const Dataset &dataset,
                               const SplitManifest &manifest,
                               const TrainerOptions &options) {
  options.scorer.validate();
  manifest.validate(&dataset);
  if (!manifest.has_folds() || manifest.k < 2)
    throw ValidationError("cross_validate: manifest has no fold assignment "
                          "(run stratified_kfold first)");
  TrainedEnsemble ens = train_members(dataset, manifest, options, nullptr);
  ens.regime = Regime::kSkf;
  return ens;
}

TrainedEnsemble train_with_target_validation(const Dataset &dataset,
                                             const SplitManifest &manifest,
                                             const std::string &target,
                                             const TrainerOptions &options) {
  options.scorer.validate();
  manifest.validate(&dataset);
  const TargetSplit &t = manifest.target(target);
  if (t.holdout_ids.empty())
    throw ValidationError("target " + target + " has no limited-data holdout");

  const auto holdout = usable_records(dataset, t.holdout_ids,
                                      options.scorer.kind);
  const std::size_t need = std::max<std::size_t>(2, options.min_holdout_embedded);
  if (holdout.size() < need) {
    throw ValidationError("target " + target + ": only "
                          + std::to_string(holdout.size())
                          + " holdout records have the required embeddings ("
                          + std::to_string(need) + " needed)");
  }

  TrainedEnsemble ens = train_members(dataset, manifest, options, &holdout);
  ens.regime = Regime::kVal;
  ens.target = target;
  for (const auto &id: t.holdout_ids) {
    if (ens.audit.gradient_ids.contains(id))
      throw Error("internal: holdout id " + id + " reached a gradient batch");
  }
  return ens;
}

TrainedEnsemble finetune(const TrainedEnsemble &source, const Dataset &dataset,
                         const SplitManifest &manifest,
                         const std::string &target,
                         const FinetuneConfig &config,
                         const TrainerOptions &options) {
  config.validate();
  if (source.regime != Regime::kSkf)
    throw ValidationError("finetune: source ensemble must come from SKF "
                          "training, got "
                          + std::string(to_string(source.regime)));
  source.validate();
  const TargetSplit &t = manifest.target(target);
  if (t.holdout_ids.empty())
    throw ValidationError("target " + target + " has no limited-data holdout");

  const ScorerKind kind = source.members.front().scorer.config.kind;
  const auto holdout = usable_records(dataset, t.holdout_ids, kind);
  if (holdout.empty())
    throw ValidationError("target " + target
                          + ": no holdout record has the required embeddings");

  TrainedEnsemble ens;
  ens.regime = Regime::kFt;
  ens.target = target;
  ens.manifest_ref = source.manifest_ref;

  for (const auto &m: source.members) {
    double r = m.scorer.best_record().val_pearson;
    ens.selection_evidence.push_back(r);
  }
  if (config.source_selection == SourceSelection::kBestValMember) {
    int best = 0;
    double best_r = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ens.selection_evidence.size(); ++i) {
      const double r = ens.selection_evidence[i];
      if (!std::isnan(r) && r > best_r) {
        best_r = r;
        best = static_cast<int>(i);
      }
    }
    ens.source_members.push_back(best);
  } else {
    for (std::size_t i = 0; i < source.members.size(); ++i)
      ens.source_members.push_back(static_cast<int>(i));
  }

  TrainerOptions curve_opts = options;
  curve_opts.scorer.kind = kind;
  const auto eval_sets = curve_eval_sets(dataset, curve_opts);

  for (int idx: ens.source_members) {
    const EnsembleMember &src = source.members[static_cast<std::size_t>(idx)];
    ScorerConfig cfg = src.scorer.config;
    cfg.max_epochs = config.finetune_epochs;
    cfg.patience = std::min(cfg.patience, cfg.max_epochs);
    cfg.seed = derive_seed(src.scorer.config.seed, "finetune");

    auto val = dataset.resolve(src.validation_ids);
    if (val.size() < 2)
      val = holdout;

    AccessAudit audit;
    FitOptions fo;
    fo.eval_sets = eval_sets;
    fo.initial = &src.scorer;
    fo.early_stopping = false;
    fo.learning_rate = config.learning_rate(src.scorer.config);
    fo.audit = &audit;

    EnsembleMember member;
    member.scorer = fit(holdout, val, cfg, fo);
    member.fold = src.fold;
    member.validation_ids = src.validation_ids;
    ens.audit.merge(audit);
    ens.members.push_back(std::move(member));
  }
  for (const auto &id: ens.audit.gradient_ids) {
    if (!std::binary_search(t.holdout_ids.begin(), t.holdout_ids.end(), id))
      throw Error("internal: non-holdout id " + id + " used for fine-tuning");
  }
  return ens;
}

std::map<std::string, double> ensemble_predict(const TrainedEnsemble &ensemble,
                                               RecordSpan records) {
  if (ensemble.members.empty())
    throw ValidationError("ensemble_predict: empty ensemble");
  std::map<std::string, double> sum;
  for (const auto *r: records)
    sum[r->complex_id] = 0.0;
  for (const auto &m: ensemble.members) {
    for (const auto *r: records)
      sum[r->complex_id] += m.scorer.predict_one(*r);
  }
  const double n = static_cast<double>(ensemble.members.size());
  for (auto &[_, v]: sum)
    v /= n;
  return sum;
}

std::vector<CurvePoint> track_curves(const TrainedEnsemble &ensemble,
                                     std::span<const std::string> eval_sets) {
  ensemble.validate();
  std::set<std::string> names;
  if (eval_sets.empty()) {
    names.insert("validation");
    for (const auto &m: ensemble.members) {
      for (const auto &h: m.scorer.history) {
        for (const auto &[name, _]: h.eval_pearson)
          names.insert(name);
      }
    }
  } else {
    names.insert(eval_sets.begin(), eval_sets.end());
  }

  int max_epoch = 0;
  const int total_epochs = ensemble.members.front().scorer.config.max_epochs;
  for (const auto &m: ensemble.members) {
    max_epoch = std::max(max_epoch, m.scorer.history.back().epoch);
    if (m.scorer.config.max_epochs != total_epochs)
      throw ValidationError("track_curves: members disagree on max_epochs");
  }

  std::vector<CurvePoint> out;
  for (const auto &name: names) {
    bool tracked = name == "validation";
    for (int epoch = 0; epoch <= max_epoch; ++epoch) {
      std::vector<double> values;
      for (const auto &m: ensemble.members) {
        const auto &hist = m.scorer.history;
        if (epoch >= static_cast<int>(hist.size()))
          continue;
        const EpochRecord &rec = hist[static_cast<std::size_t>(epoch)];
        double v;
        if (name == "validation") {
          v = rec.val_pearson;
        } else {
          auto it = rec.eval_pearson.find(name);
          if (it == rec.eval_pearson.end())
            continue;
          tracked = true;
          v = it->second;
        }
        if (!std::isnan(v))
          values.push_back(v);
      }
      if (values.empty())
        continue;
      CurvePoint p;
      p.eval_set = name;
      p.epoch = epoch;
      p.epoch_pct = 100.0 * epoch / total_epochs;
      p.n_members = values.size();
      double mean = 0;
      for (double v: values)
        mean += v;
      mean /= static_cast<double>(values.size());
      double ss = 0;
      for (double v: values)
        ss += (v - mean) * (v - mean);
      p.mean_pearson = mean;
      p.std_pearson = values.size() > 1
                          ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                          : 0.0;
      out.push_back(std::move(p));
    }
    if (!tracked)
      throw ValidationError("track_curves: eval set '" + name
                            + "' was not tracked during training");
  }
  return out;
}

std::string curves_to_csv(std::span<const CurvePoint> curves) {
  std::ostringstream os;
  os << "eval_set,epoch_pct,n_members,mean_pearson,std_pearson\n";
  for (const auto &p: curves) {
    os << csv_escape(p.eval_set) << ',' << format_double(p.epoch_pct) << ','
       << p.n_members << ',' << format_double(p.mean_pearson) << ','
       << format_double(p.std_pearson) << '\n';
  }
  return os.str();
}

void save_ensemble(const TrainedEnsemble &ensemble,
                   const std::filesystem::path &dir) {
  ensemble.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    const auto &m = ensemble.members[i];
    const std::string file = "member-" + std::to_string(i) + ".model";
    save_scorer(m.scorer, dir / file);
    members.push_back({ { "file", file },
                        { "fold", m.fold },
                        { "validation_ids", m.validation_ids } });
  }
  const nlohmann::json doc {
    { "regime", to_string(ensemble.regime) },
    { "target", ensemble.target },
    { "manifest_ref", ensemble.manifest_ref },
    { "members", members },
    { "source_members", ensemble.source_members },
    { "selection_evidence", ensemble.selection_evidence },
    { "audit",
      { { "gradient_ids", ensemble.audit.gradient_ids },
        { "validation_ids", ensemble.audit.validation_ids },
        { "eval_ids", ensemble.audit.eval_ids } } },
  };
  std::ofstream os(dir / "ensemble.json", std::ios::binary);
  if (!os)
    throw Error("cannot write " + (dir / "ensemble.json").string());
  os << doc.dump(1) << '\n';
}

TrainedEnsemble load_ensemble(const std::filesystem::path &dir) {
  const auto path = dir / "ensemble.json";
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw FormatError("cannot read " + path.string());
  TrainedEnsemble e;
  try {
    const auto doc = nlohmann::json::parse(is);
    e.regime = parse_regime(doc.at("regime").get<std::string>());
    e.target = doc.at("target").get<std::string>();
    e.manifest_ref = doc.at("manifest_ref").get<std::string>();
    for (const auto &m: doc.at("members")) {
      EnsembleMember member;
      member.scorer = load_scorer(dir / m.at("file").get<std::string>());
      member.fold = m.at("fold").get<int>();
      member.validation_ids = m.at("validation_ids").get<std::vector<std::string>>();
      e.members.push_back(std::move(member));
    }
    e.source_members = doc.at("source_members").get<std::vector<int>>();
    for (const auto &v: doc.at("selection_evidence")) {
      e.selection_evidence.push_back(
          v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    const auto &audit = doc.at("audit");
    e.audit.gradient_ids = audit.at("gradient_ids").get<std::set<std::string>>();
    e.audit.validation_ids = audit.at("validation_ids").get<std::set<std::string>>();
    e.audit.eval_ids = audit.at("eval_ids").get<std::set<std::string>>();
  } catch (const nlohmann::json::exception &ex) {
    throw FormatError(path.string() + ": " + ex.what());
  }
  e.validate();
  return e;
}

}  // namespace oodscore
