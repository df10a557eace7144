//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/cli.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oodscore/config.h"
#include "oodscore/csv.h"
#include "oodscore/dataset.h"
#include "oodscore/digest.h"
#include "oodscore/embedding_space.h"
#include "oodscore/errors.h"
#include "oodscore/metrics.h"
#include "oodscore/split.h"
#include "oodscore/synthetic.h"
#include "oodscore/trainer.h"

namespace oodscore {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const fs::path &path, std::string_view bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw Error("cannot write " + path.string());
  os << bytes;
}

json read_json(const fs::path &path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> read_id_list(const fs::path &path) {
  std::ifstream is(path);
  if (!is)
    throw ValidationError("cannot read " + path.string());
  std::vector<std::string> ids;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos)
      continue;
    line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    if (first && line == "complex_id") {
      first = false;
      continue;
    }
    first = false;
    ids.push_back(line);
  }
  return ids;
}

// Run directories "<command>-NNN" under the workspace root. A run counts as
// complete once its run.json exists.
class Workspace {
public:
  explicit Workspace(fs::path root): root_(std::move(root)) {}

  const fs::path &root() const { return root_; }

  std::pair<std::string, fs::path> create_run(const std::string &command) {
    fs::create_directories(root_);
    for (int n = 1;; ++n) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%03d", n);
      const std::string id = command + "-" + buf;
      if (fs::create_directory(root_ / id))
        return { id, root_ / id };
    }
  }

  std::optional<std::string> latest(const std::string &command) const {
    if (!fs::is_directory(root_))
      return std::nullopt;
    std::optional<std::string> best;
    int best_n = -1;
    for (const auto &e: fs::directory_iterator(root_)) {
      const std::string name = e.path().filename().string();
      if (!e.is_directory() || !name.starts_with(command + "-")
          || !fs::exists(e.path() / "run.json"))
        continue;
      try {
        const int n = std::stoi(name.substr(command.size() + 1));
        if (n > best_n) {
          best_n = n;
          best = name;
        }
      } catch (const std::exception &) {
      }
    }
    return best;
  }

  // Resolves an explicit run id or the latest run of `command`.
  std::string require(const std::string &command,
                      const std::optional<std::string> &explicit_id,
                      const std::string &needed_by) const {
    if (explicit_id) {
      if (!fs::exists(root_ / *explicit_id / "run.json"))
        throw PrerequisiteError("run '" + *explicit_id + "' not found in "
                                + root_.string() + "; run `oodscore "
                                + command + "` first");
      return *explicit_id;
    }
    auto id = latest(command);
    if (!id)
      throw PrerequisiteError(needed_by + " needs a completed `oodscore "
                              + command + "` run in " + root_.string());
    return *id;
  }

  fs::path dir(const std::string &run_id) const { return root_ / run_id; }

  json manifest(const std::string &run_id) const {
    return read_json(dir(run_id) / "run.json");
  }

private:
  fs::path root_;
};

struct RunRecord {
  std::string run_id;
  std::string command;
  fs::path dir;
  json config = nullptr;
  json seeds = json::object();
  json inputs = json::object();
  json parents = json::object();
  json details = json::object();

  void input(const std::string &label, const fs::path &path) {
    inputs[label] = { { "path", path.string() },
                      { "sha256", sha256_path(path) } };
  }

  void finish() const {
    std::vector<std::string> outputs;
    for (const auto &e: fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file())
        outputs.push_back(fs::relative(e.path(), dir).generic_string());
    }
    std::sort(outputs.begin(), outputs.end());
    json doc {
      { "run_id", run_id },
      { "command", command },
      { "tool_version", OODSCORE_VERSION },
      { "config_sha256", config.is_null() ? json(nullptr)
                                          : json(sha256_hex(config.dump())) },
      { "config", config },
      { "seeds", seeds },
      { "inputs", inputs },
      { "parents", parents },
      { "outputs", outputs },
    };
    if (!details.empty())
      doc["details"] = details;
    write_file(dir / "run.json", doc.dump(1) + "\n");
  }
};

struct Context {
  Workspace workspace;
  std::ostream &out;
  std::ostream &err;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const CommonOptions &o) {
  if (o.config_path.empty())
    throw ValidationError("--config is required");
  RunConfig c = load_run_config(o.config_path);
  if (o.seed) {
    c.seed = *o.seed;
    c.scorer.seed = *o.seed;
  }
  return c;
}

RunRecord start_run(Context &ctx, const std::string &command,
                    const RunConfig *config) {
  auto [id, dir] = ctx.workspace.create_run(command);
  RunRecord r { id, command, dir };
  if (config) {
    r.config = to_json(*config);
    r.seeds["seed"] = config->seed;
    r.seeds["scorer_seed"] = config->scorer.seed;
  }
  return r;
}

// Loads the dataset produced by an ingest run.
Dataset dataset_of(const Context &ctx, const std::string &ingest_run) {
  return load_dataset(ctx.workspace.dir(ingest_run) / "dataset.json");
}

struct SplitInputs {
  std::string split_run;
  std::string ingest_run;
  Dataset dataset;
  SplitManifest manifest;
  fs::path manifest_path;
};

SplitInputs split_inputs(const Context &ctx, const std::string &split_run) {
  SplitInputs in;
  in.split_run = split_run;
  in.ingest_run = ctx.workspace.manifest(split_run).at("parents").at("ingest");
  in.dataset = dataset_of(ctx, in.ingest_run);
  in.manifest_path = ctx.workspace.dir(split_run) / "split_manifest.json";
  in.manifest = load_split_manifest(in.manifest_path);
  in.manifest.validate(&in.dataset);
  return in;
}

// --- commands ---------------------------------------------------------------

void cmd_generate(Context &ctx, const std::string &spec_path,
                  const std::string &out_dir,
                  const std::optional<std::uint64_t> &seed) {
  GeneratorSpec spec;
  if (!spec_path.empty())
    spec = generator_spec_from_json(read_json(spec_path));
  else
    spec.cluster_sizes.assign(static_cast<std::size_t>(spec.n_clusters), 50);
  if (seed)
    spec.seed = *seed;
  const auto data = generate(spec);
  write_synthetic_files(data, out_dir);
  write_file(fs::path(out_dir) / "generator_spec.json",
             to_json(spec).dump(1) + "\n");
  ctx.out << "generated " << data.dataset.size() << " complexes in "
          << out_dir << "\n";
}

void cmd_ingest(Context &ctx, const RunConfig &cfg) {
  IngestOptions opts;
  opts.complex_table = cfg.data.complex_table;
  if (cfg.data.interaction_embeddings)
    opts.interaction = EmbeddingSource { *cfg.data.interaction_embeddings,
                                         cfg.data.embedding_dim };
  if (cfg.data.ligand_embeddings)
    opts.ligand = EmbeddingSource { *cfg.data.ligand_embeddings,
                                    cfg.data.ligand_dim };
  opts.provenance = cfg.data.complex_table.filename().string();
  const auto result = ingest_dataset(opts);

  auto run = start_run(ctx, "ingest", &cfg);
  save_dataset(result.dataset, run.dir / "dataset.json");
  write_file(run.dir / "ingestion_report.json",
             to_json(result.report).dump(1) + "\n");
  run.input("complex_table", cfg.data.complex_table);
  if (cfg.data.interaction_embeddings)
    run.input("interaction_embeddings", *cfg.data.interaction_embeddings);
  if (cfg.data.ligand_embeddings)
    run.input("ligand_embeddings", *cfg.data.ligand_embeddings);
  run.finish();

  ctx.out << run.run_id << ": " << result.report.n_rows << " complexes";
  if (result.report.interaction) {
    ctx.out << ", " << result.report.interaction->embedded
            << " with interaction embeddings";
  }
  ctx.out << "\n";
}

void cmd_split(Context &ctx, const RunConfig &cfg,
               const std::optional<std::string> &dataset_run) {
  if (cfg.split.targets.empty())
    throw ValidationError("config split.targets: at least one target is required");
  const auto ingest = ctx.workspace.require("ingest", dataset_run, "split");
  const auto dataset = dataset_of(ctx, ingest);

  auto manifest = build_ood_split(dataset, cfg.split.targets, cfg.seed);
  std::vector<std::string> warnings;
  if (cfg.split.clean.enabled) {
    if (!cfg.data.similarity)
      throw ValidationError("config split.clean.enabled: requires data.similarity");
    std::set<std::string> reference;
    if (cfg.data.clean_reference_ids) {
      for (auto &id: read_id_list(*cfg.data.clean_reference_ids))
        reference.insert(std::move(id));
    }
    if (cfg.split.clean.include_target_tests) {
      for (const auto &[name, t]: manifest.targets)
        reference.insert(t.test_ids.begin(), t.test_ids.end());
    }
    const std::vector<std::string> ref(reference.begin(), reference.end());
    const auto sims = read_similarity_csv(*cfg.data.similarity);
    auto filtered = apply_clean_filter(manifest, sims, ref,
                                       cfg.split.clean.thresholds,
                                       cfg.split.clean.rule);
    manifest = std::move(filtered.manifest);
    warnings = std::move(filtered.warnings);
  }
  manifest = stratified_kfold(manifest, dataset, cfg.split.k, cfg.split.n_bins,
                              cfg.seed);
  manifest = holdout_limited(manifest, cfg.split.n_holdout, cfg.seed);
  manifest.validate(&dataset);

  auto run = start_run(ctx, "split", &cfg);
  save_split_manifest(manifest, run.dir / "split_manifest.json");
  run.parents["ingest"] = ingest;
  run.input("dataset", ctx.workspace.dir(ingest) / "dataset.json");
  if (cfg.split.clean.enabled) {
    run.input("similarity", *cfg.data.similarity);
    if (cfg.data.clean_reference_ids)
      run.input("clean_reference_ids", *cfg.data.clean_reference_ids);
    run.details["clean_excluded"] = manifest.clean_excluded_ids.size();
    run.details["warnings"] = warnings;
  }
  run.finish();

  for (const auto &w: warnings)
    ctx.err << "warning: " << w << "\n";
  ctx.out << run.run_id << ": train_val " << manifest.train_val_ids.size();
  for (const auto &[name, t]: manifest.targets)
    ctx.out << ", " << name << " " << t.test_ids.size();
  ctx.out << "\n";
}

TrainerOptions trainer_options(const RunConfig &cfg, const SplitInputs &in) {
  TrainerOptions opts;
  opts.scorer = cfg.scorer;
  opts.curve_sets = target_curve_sets(in.manifest);
  opts.min_holdout_embedded = cfg.training.min_holdout_embedded;
  opts.manifest_ref = sha256_path(in.manifest_path);
  return opts;
}

void write_training_outputs(const TrainedEnsemble &ensemble, RunRecord &run) {
  save_ensemble(ensemble, run.dir / "model");
  write_file(run.dir / "curves.csv", curves_to_csv(track_curves(ensemble)));
  json members = json::array();
  for (const auto &m: ensemble.members) {
    members.push_back({ { "fold", m.fold },
                        { "best_epoch", m.scorer.best_epoch },
                        { "epochs_run", m.scorer.history.back().epoch },
                        { "stop_metric", m.scorer.stop_metric == StopMetric::kPearson
                                             ? "pearson"
                                             : "rmse" } });
  }
  run.details["regime"] = to_string(ensemble.regime);
  run.details["target"] = ensemble.target;
  run.details["members"] = members;
}

std::string resolve_target(const RunConfig &cfg,
                           const std::optional<std::string> &flag,
                           const SplitManifest &manifest,
                           const std::string &command) {
  std::optional<std::string> target = flag ? flag : cfg.training.target;
  if (!target)
    throw ValidationError(command + " needs a target (--target or "
                                    "training.target)");
  if (!manifest.targets.contains(*target))
    throw ValidationError("unknown target '" + *target + "'");
  return *target;
}

void cmd_train(Context &ctx, const RunConfig &cfg, Regime regime,
               const std::optional<std::string> &target_flag,
               const std::optional<std::string> &split_run) {
  if (regime == Regime::kFt)
    throw ValidationError("use `oodscore finetune` for the FT regime");
  const auto in = split_inputs(ctx, ctx.workspace.require("split", split_run, "train"));
  const auto opts = trainer_options(cfg, in);

  TrainedEnsemble ensemble;
  if (regime == Regime::kSkf) {
    ensemble = cross_validate(in.dataset, in.manifest, opts);
  } else {
    const auto target = resolve_target(cfg, target_flag, in.manifest, "train --regime val");
    ensemble = train_with_target_validation(in.dataset, in.manifest, target, opts);
  }

  auto run = start_run(ctx, "train", &cfg);
  write_training_outputs(ensemble, run);
  run.parents["split"] = in.split_run;
  run.parents["ingest"] = in.ingest_run;
  run.input("split_manifest", in.manifest_path);
  run.input("dataset", ctx.workspace.dir(in.ingest_run) / "dataset.json");
  run.finish();
  ctx.out << run.run_id << ": " << to_string(regime) << " ensemble of "
          << ensemble.members.size() << " member(s)\n";
}

void cmd_finetune(Context &ctx, const RunConfig &cfg, const std::string &source,
                  const std::optional<std::string> &target_flag) {
  const auto train_run = ctx.workspace.require("train", source, "finetune");
  const auto parents = ctx.workspace.manifest(train_run).at("parents");
  const auto in = split_inputs(ctx, parents.at("split").get<std::string>());
  const auto source_ensemble = load_ensemble(ctx.workspace.dir(train_run) / "model");
  const auto target = resolve_target(cfg, target_flag, in.manifest, "finetune");
  const auto opts = trainer_options(cfg, in);
  const auto ensemble = finetune(source_ensemble, in.dataset, in.manifest,
                                 target, cfg.finetune, opts);

  auto run = start_run(ctx, "finetune", &cfg);
  write_training_outputs(ensemble, run);
  run.parents["source"] = train_run;
  run.parents["split"] = in.split_run;
  run.parents["ingest"] = in.ingest_run;
  run.input("source_model", ctx.workspace.dir(train_run) / "model");
  run.input("split_manifest", in.manifest_path);
  run.finish();
  ctx.out << run.run_id << ": FT-" << cfg.finetune.finetune_epochs << " of "
          << train_run << " on " << target << "\n";
}

void cmd_evaluate(Context &ctx, const RunConfig &cfg, const std::string &model_run,
                  const std::optional<std::string> &test_set_flag) {
  if (!fs::exists(ctx.workspace.dir(model_run) / "run.json"))
    throw PrerequisiteError("evaluate needs a completed `oodscore train` or "
                            "`oodscore finetune` run; '" + model_run
                            + "' not found");
  const auto parents = ctx.workspace.manifest(model_run).at("parents");
  if (!parents.contains("split"))
    throw ValidationError("run '" + model_run + "' is not a training run");
  const auto in = split_inputs(ctx, parents.at("split").get<std::string>());
  const auto ensemble = load_ensemble(ctx.workspace.dir(model_run) / "model");

  std::string test_set = test_set_flag.value_or(cfg.evaluation.test_set);
  if (test_set == "auto")
    test_set = ensemble.regime == Regime::kSkf ? "full" : "reduced";
  if (test_set != "full" && test_set != "reduced")
    throw ValidationError("--test-set must be auto, full or reduced");
  if (test_set == "full" && ensemble.regime != Regime::kSkf)
    throw ValidationError(std::string(to_string(ensemble.regime))
                          + " models saw the target holdout; evaluate them on "
                            "the reduced test set");

  std::vector<std::string> targets;
  if (ensemble.target.empty()) {
    for (const auto &[name, t]: in.manifest.targets)
      targets.push_back(name);
  } else {
    targets.push_back(ensemble.target);
  }

  const ScorerKind kind = ensemble.members.front().scorer.config.kind;
  TargetPredictions predictions;
  std::map<std::string, std::vector<std::string>> expected, excluded;
  for (const auto &name: targets) {
    const auto ids = test_set == "full" ? in.manifest.target(name).test_ids
                                        : in.manifest.reporting_test_ids(name);
    std::vector<const ComplexRecord *> records;
    for (const auto &id: ids) {
      const auto &r = in.dataset.at(id);
      if (has_required_embeddings(r, kind)) {
        records.push_back(&r);
        expected[name].push_back(id);
      } else {
        excluded[name].push_back(id);
      }
    }
    predictions[name] = ensemble_predict(ensemble, records);
  }
  auto report = build_report(predictions, in.dataset, expected);
  report.test_set = test_set;
  report.excluded_ids = excluded;

  auto run = start_run(ctx, "evaluate", &cfg);
  if (cfg.data.docking_decoys) {
    report.docking = summarize_docking(read_decoy_csv(*cfg.data.docking_decoys),
                                       cfg.evaluation.docking);
    run.input("docking_decoys", *cfg.data.docking_decoys);
  }
  if (cfg.data.screening_decoys) {
    report.screening = summarize_screening(read_decoy_csv(*cfg.data.screening_decoys),
                                           cfg.evaluation.ef_fractions);
    run.input("screening_decoys", *cfg.data.screening_decoys);
  }
  write_file(run.dir / "report.json", to_json(report).dump(1) + "\n");
  write_file(run.dir / "report.csv", to_csv(report));
  run.parents["model"] = model_run;
  run.parents["split"] = in.split_run;
  run.parents["ingest"] = in.ingest_run;
  run.input("model", ctx.workspace.dir(model_run) / "model");
  run.input("split_manifest", in.manifest_path);
  run.finish();

  ctx.out << run.run_id << ": " << to_string(ensemble.regime) << " on "
          << test_set << " test sets, Avg r "
          << format_double(report.aggregate.avg_pearson) << ", Min r "
          << format_double(report.aggregate.min_pearson) << "\n";
}

void cmd_project(Context &ctx, const RunConfig &cfg,
                 const std::optional<std::string> &dataset_run) {
  const auto ingest = ctx.workspace.require("ingest", dataset_run, "project");
  const auto dataset = dataset_of(ctx, ingest);
  TsneOptions opts;
  opts.perplexity = cfg.projection.perplexity;
  opts.n_iterations = cfg.projection.n_iterations;
  opts.exaggeration_iterations = std::min(opts.exaggeration_iterations,
                                          opts.n_iterations);
  const auto result = project_tsne(interaction_embeddings(dataset), cfg.seed, opts);

  auto run = start_run(ctx, "project", &cfg);
  write_file(run.dir / "projection.json", to_json(result).dump(1) + "\n");
  for (auto coloring: cfg.projection.colorings) {
    render_projection(result, dataset, coloring,
                      cfg.projection.highlight_clusters, run.dir,
                      "tsne_" + std::string(to_string(coloring)));
  }
  run.parents["ingest"] = ingest;
  run.input("dataset", ctx.workspace.dir(ingest) / "dataset.json");
  run.finish();
  ctx.out << run.run_id << ": projected " << result.coordinates.size()
          << " embeddings\n";
}

void cmd_report(Context &ctx, const std::optional<std::string> &eval_run) {
  const auto id = ctx.workspace.require("evaluate", eval_run, "report");
  const auto doc = read_json(ctx.workspace.dir(id) / "report.json");
  const std::string text = read_file(ctx.workspace.dir(id) / "report.csv");
  ctx.out << "# " << id << " (" << doc.at("test_set").get<std::string>()
          << " test sets)\n"
          << text;
}

int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const PrerequisiteError *>(&e))
    return kExitPrerequisite;
  if (dynamic_cast<const ValidationError *>(&e))
    return kExitValidation;
  return kExitRuntime;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err) {
  CLI::App app { "Out-of-distribution evaluation of protein-ligand scoring "
                 "functions" };
  app.set_version_flag("--version", OODSCORE_VERSION);
  app.require_subcommand(1);

  std::string workspace;
  app.add_option("--workspace", workspace,
                 "Workspace root (default: $OODSCORE_WORKSPACE or .)");

  CommonOptions common;
  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", common.config_path, "Run configuration JSON")
        ->required();
    sub->add_option("--seed", common.seed, "Overrides the configured seed");
  };

  auto *generate_cmd = app.add_subcommand("generate", "Write a synthetic dataset");
  std::string spec_path, out_dir;
  std::optional<std::uint64_t> gen_seed;
  generate_cmd->add_option("--spec", spec_path, "Generator spec JSON");
  generate_cmd->add_option("--out", out_dir, "Output directory")->required();
  generate_cmd->add_option("--seed", gen_seed, "Overrides the spec seed");

  auto *ingest_cmd = app.add_subcommand("ingest", "Build the dataset store");
  add_common(ingest_cmd);

  std::optional<std::string> dataset_run;
  auto *split_cmd = app.add_subcommand("split", "Build the split manifest");
  add_common(split_cmd);
  split_cmd->add_option("--dataset", dataset_run, "Ingest run (default: latest)");

  auto *train_cmd = app.add_subcommand("train", "Train an SKF or VAL ensemble");
  add_common(train_cmd);
  std::string regime_text;
  std::optional<std::string> target, split_run;
  train_cmd->add_option("--regime", regime_text, "skf or val")
      ->required()
      ->check(CLI::IsMember({ "skf", "val", "SKF", "VAL" }));
  train_cmd->add_option("--target", target, "Target for VAL");
  train_cmd->add_option("--split", split_run, "Split run (default: latest)");

  auto *finetune_cmd = app.add_subcommand("finetune", "Fine-tune an SKF model on a target holdout");
  add_common(finetune_cmd);
  std::string source;
  finetune_cmd->add_option("--source", source, "SKF train run")->required();
  finetune_cmd->add_option("--target", target, "Target to fine-tune on");

  auto *evaluate_cmd = app.add_subcommand("evaluate", "Score the target test sets");
  add_common(evaluate_cmd);
  std::string model_run;
  std::optional<std::string> test_set;
  evaluate_cmd->add_option("--run", model_run, "Train or finetune run")->required();
  evaluate_cmd->add_option("--test-set", test_set, "auto, full or reduced");

  auto *project_cmd = app.add_subcommand("project", "t-SNE projection and plots");
  add_common(project_cmd);
  project_cmd->add_option("--dataset", dataset_run, "Ingest run (default: latest)");
  std::optional<double> perplexity;
  project_cmd->add_option("--perplexity", perplexity, "Overrides the configured perplexity");

  auto *report_cmd = app.add_subcommand("report", "Print an evaluation report");
  std::optional<std::string> eval_run;
  report_cmd->add_option("--run", eval_run, "Evaluate run (default: latest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (workspace.empty()) {
    const char *env = std::getenv("OODSCORE_WORKSPACE");
    workspace = env && *env ? env : ".";
  }
  Context ctx { Workspace(workspace), out, err };

  try {
    if (generate_cmd->parsed()) {
      cmd_generate(ctx, spec_path, out_dir, gen_seed);
    } else if (report_cmd->parsed()) {
      cmd_report(ctx, eval_run);
    } else {
      RunConfig cfg = load_config(common);
      if (ingest_cmd->parsed()) {
        cmd_ingest(ctx, cfg);
      } else if (split_cmd->parsed()) {
        cmd_split(ctx, cfg, dataset_run);
      } else if (train_cmd->parsed()) {
        cmd_train(ctx, cfg, parse_regime(regime_text), target, split_run);
      } else if (finetune_cmd->parsed()) {
        cmd_finetune(ctx, cfg, source, target);
      } else if (evaluate_cmd->parsed()) {
        cmd_evaluate(ctx, cfg, model_run, test_set);
      } else if (project_cmd->parsed()) {
        if (perplexity)
          cfg.projection.perplexity = *perplexity;
        cmd_project(ctx, cfg, dataset_run);
      }
    }
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}

}  // namespace oodscore
