//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/config.h"

#include <fstream>

#include "oodscore/errors.h"

namespace oodscore {

namespace {

[[noreturn]] void fail(const std::string &path, const std::string &what) {
  throw ValidationError("config " + path + ": " + what);
}

template <class T>
T get(const nlohmann::json &v, const std::string &path) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception &e) {
    fail(path, e.what());
  }
}

void require_object(const nlohmann::json &v, const std::string &path) {
  if (!v.is_object())
    fail(path, "expected an object");
}

std::filesystem::path existing_path(const nlohmann::json &v,
                                    const std::string &path,
                                    const std::filesystem::path &base_dir) {
  std::filesystem::path p = get<std::string>(v, path);
  if (p.is_relative())
    p = base_dir / p;
  p = p.lexically_normal();
  if (!std::filesystem::exists(p))
    fail(path, "path does not exist: " + p.string());
  return p;
}

// Optional paths accept null as "not set".
std::optional<std::filesystem::path>
optional_existing_path(const nlohmann::json &v, const std::string &path,
                       const std::filesystem::path &base_dir) {
  if (v.is_null())
    return std::nullopt;
  return existing_path(v, path, base_dir);
}

DataConfig parse_data(const nlohmann::json &doc,
                      const std::filesystem::path &base) {
  require_object(doc, "data");
  DataConfig d;
  bool has_table = false;
  for (const auto &[key, v]: doc.items()) {
    const std::string path = "data." + key;
    if (key == "complex_table") {
      d.complex_table = existing_path(v, path, base);
      has_table = true;
    } else if (key == "interaction_embeddings") {
      d.interaction_embeddings = optional_existing_path(v, path, base);
    } else if (key == "ligand_embeddings") {
      d.ligand_embeddings = optional_existing_path(v, path, base);
    } else if (key == "embedding_dim") {
      d.embedding_dim = get<std::size_t>(v, path);
    } else if (key == "ligand_dim") {
      d.ligand_dim = get<std::size_t>(v, path);
    } else if (key == "similarity") {
      d.similarity = optional_existing_path(v, path, base);
    } else if (key == "clean_reference_ids") {
      d.clean_reference_ids = optional_existing_path(v, path, base);
    } else if (key == "docking_decoys") {
      d.docking_decoys = optional_existing_path(v, path, base);
    } else if (key == "screening_decoys") {
      d.screening_decoys = optional_existing_path(v, path, base);
    } else {
      fail(path, "unknown key");
    }
  }
  if (!has_table)
    fail("data.complex_table", "required");
  if (d.embedding_dim == 0 || d.ligand_dim == 0)
    fail("data", "embedding dimensions must be positive");
  return d;
}

CleanConfig parse_clean(const nlohmann::json &doc) {
  require_object(doc, "split.clean");
  CleanConfig c;
  for (const auto &[key, v]: doc.items()) {
    const std::string path = "split.clean." + key;
    if (key == "enabled") {
      c.enabled = get<bool>(v, path);
    } else if (key == "rule") {
      try {
        c.rule = parse_clean_rule(get<std::string>(v, path));
      } catch (const ValidationError &e) {
        fail(path, e.what());
      }
    } else if (key == "include_target_tests") {
      c.include_target_tests = get<bool>(v, path);
    } else if (key == "thresholds") {
      require_object(v, path);
      for (const auto &[tk, tv]: v.items()) {
        const std::string tpath = path + "." + tk;
        const double t = get<double>(tv, tpath);
        if (!(t >= 0.0 && t <= 1.0))
          fail(tpath, "must be in [0, 1]");
        if (tk == "ligand")
          c.thresholds.ligand = t;
        else if (tk == "pose")
          c.thresholds.pose = t;
        else if (tk == "pocket")
          c.thresholds.pocket = t;
        else
          fail(tpath, "unknown key");
      }
    } else {
      fail(path, "unknown key");
    }
  }
  return c;
}

SplitConfig parse_split(const nlohmann::json &doc) {
  require_object(doc, "split");
  SplitConfig s;
  for (const auto &[key, v]: doc.items()) {
    const std::string path = "split." + key;
    if (key == "targets") {
      s.targets = get<std::map<std::string, std::string>>(v, path);
    } else if (key == "k") {
      s.k = get<int>(v, path);
    } else if (key == "n_bins") {
      s.n_bins = get<int>(v, path);
    } else if (key == "n_holdout") {
      s.n_holdout = get<int>(v, path);
    } else if (key == "clean") {
      s.clean = parse_clean(v);
    } else {
      fail(path, "unknown key");
    }
  }
  if (s.k < 2)
    fail("split.k", "must be >= 2");
  if (s.n_bins < 2)
    fail("split.n_bins", "must be >= 2");
  if (s.n_holdout < 1)
    fail("split.n_holdout", "must be >= 1");
  return s;
}

TrainingConfig parse_training(const nlohmann::json &doc) {
  require_object(doc, "training");
  TrainingConfig t;
  for (const auto &[key, v]: doc.items()) {
    const std::string path = "training." + key;
    if (key == "target")
      t.target = v.is_null() ? std::nullopt
                             : std::optional(get<std::string>(v, path));
    else if (key == "min_holdout_embedded")
      t.min_holdout_embedded = get<std::size_t>(v, path);
    else
      fail(path, "unknown key");
  }
  return t;
}

EvaluationConfig parse_evaluation(const nlohmann::json &doc) {
  require_object(doc, "evaluation");
  EvaluationConfig e;
  for (const auto &[key, v]: doc.items()) {
    const std::string path = "evaluation." + key;
    if (key == "test_set") {
      e.test_set = get<std::string>(v, path);
      if (e.test_set != "full" && e.test_set != "reduced" && e.test_set != "auto")
        fail(path, "must be \"auto\", \"full\" or \"reduced\"");
    } else if (key == "rmsd_cutoff") {
      e.docking.rmsd_cutoff = get<double>(v, path);
      if (!(e.docking.rmsd_cutoff > 0))
        fail(path, "must be positive");
    } else if (key == "top_n") {
      e.docking.top_n = get<int>(v, path);
      if (e.docking.top_n < 1)
        fail(path, "must be >= 1");
    } else if (key == "ef_fractions") {
      e.ef_fractions = get<std::vector<double>>(v, path);
      for (double f: e.ef_fractions) {
        if (!(f > 0 && f <= 1))
          fail(path, "fractions must be in (0, 1]");
      }
    } else {
      fail(path, "unknown key");
    }
  }
  return e;
}

ProjectionConfig parse_projection(const nlohmann::json &doc) {
  require_object(doc, "projection");
  ProjectionConfig p;
  for (const auto &[key, v]: doc.items()) {
    const std::string path = "projection." + key;
    if (key == "perplexity") {
      p.perplexity = get<double>(v, path);
      if (!(p.perplexity > 0))
        fail(path, "must be positive");
    } else if (key == "n_iterations") {
      p.n_iterations = get<int>(v, path);
      if (p.n_iterations < 1)
        fail(path, "must be >= 1");
    } else if (key == "colorings") {
      p.colorings.clear();
      for (const auto &c: get<std::vector<std::string>>(v, path)) {
        try {
          p.colorings.push_back(parse_coloring(c));
        } catch (const ValidationError &e) {
          fail(path, e.what());
        }
      }
    } else if (key == "highlight_clusters") {
      p.highlight_clusters = get<std::vector<std::string>>(v, path);
    } else if (key == "plot_format") {
      p.plot_format = get<std::string>(v, path);
      if (p.plot_format != "svg")
        fail(path, "only \"svg\" is supported");
    } else {
      fail(path, "unknown key");
    }
  }
  return p;
}

nlohmann::json optional_path(const std::optional<std::filesystem::path> &p) {
  return p ? nlohmann::json(p->string()) : nlohmann::json(nullptr);
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json &doc,
                               const std::filesystem::path &base_dir) {
  require_object(doc, "(root)");
  RunConfig c;
  bool has_data = false, has_version = false;
  for (const auto &[key, v]: doc.items()) {
    if (key == "schema_version") {
      c.schema_version = get<int>(v, key);
      has_version = true;
    } else if (key == "seed") {
      c.seed = get<std::uint64_t>(v, key);
    } else if (key == "data") {
      c.data = parse_data(v, base_dir);
      has_data = true;
    } else if (key == "split") {
      c.split = parse_split(v);
    } else if (key == "scorer") {
      try {
        c.scorer = scorer_config_from_json(v);
      } catch (const ValidationError &e) {
        throw ValidationError(std::string("config ") + e.what());
      }
    } else if (key == "finetune") {
      try {
        c.finetune = finetune_config_from_json(v);
      } catch (const ValidationError &e) {
        throw ValidationError(std::string("config ") + e.what());
      }
    } else if (key == "training") {
      c.training = parse_training(v);
    } else if (key == "evaluation") {
      c.evaluation = parse_evaluation(v);
    } else if (key == "projection") {
      c.projection = parse_projection(v);
    } else {
      fail(key, "unknown key");
    }
  }
  if (!doc.contains("scorer") || !doc["scorer"].contains("seed"))
    c.scorer.seed = c.seed;
  if (!has_version)
    fail("schema_version", "required");
  if (c.schema_version != kSchemaVersion)
    fail("schema_version", "unsupported version "
                               + std::to_string(c.schema_version));
  if (!has_data)
    fail("data", "required");
  if (c.training.target && !c.split.targets.contains(*c.training.target))
    fail("training.target", "'" + *c.training.target
                                + "' is not a split target");
  return c;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ValidationError("cannot read config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception &e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(doc, std::filesystem::absolute(path).parent_path());
}

nlohmann::json to_json(const RunConfig &c) {
  std::vector<std::string> colorings;
  for (auto k: c.projection.colorings)
    colorings.emplace_back(to_string(k));
  return {
    { "schema_version", c.schema_version },
    { "seed", c.seed },
    { "data",
      { { "complex_table", c.data.complex_table.string() },
        { "interaction_embeddings", optional_path(c.data.interaction_embeddings) },
        { "ligand_embeddings", optional_path(c.data.ligand_embeddings) },
        { "embedding_dim", c.data.embedding_dim },
        { "ligand_dim", c.data.ligand_dim },
        { "similarity", optional_path(c.data.similarity) },
        { "clean_reference_ids", optional_path(c.data.clean_reference_ids) },
        { "docking_decoys", optional_path(c.data.docking_decoys) },
        { "screening_decoys", optional_path(c.data.screening_decoys) } } },
    { "split",
      { { "targets", c.split.targets },
        { "k", c.split.k },
        { "n_bins", c.split.n_bins },
        { "n_holdout", c.split.n_holdout },
        { "clean",
          { { "enabled", c.split.clean.enabled },
            { "rule", to_string(c.split.clean.rule) },
            { "include_target_tests", c.split.clean.include_target_tests },
            { "thresholds",
              { { "ligand", c.split.clean.thresholds.ligand },
                { "pose", c.split.clean.thresholds.pose },
                { "pocket", c.split.clean.thresholds.pocket } } } } } } },
    { "scorer", to_json(c.scorer) },
    { "finetune", to_json(c.finetune) },
    { "training",
      { { "target", c.training.target ? nlohmann::json(*c.training.target)
                                      : nlohmann::json(nullptr) },
        { "min_holdout_embedded", c.training.min_holdout_embedded } } },
    { "evaluation",
      { { "test_set", c.evaluation.test_set },
        { "rmsd_cutoff", c.evaluation.docking.rmsd_cutoff },
        { "top_n", c.evaluation.docking.top_n },
        { "ef_fractions", c.evaluation.ef_fractions } } },
    { "projection",
      { { "perplexity", c.projection.perplexity },
        { "n_iterations", c.projection.n_iterations },
        { "colorings", colorings },
        { "highlight_clusters", c.projection.highlight_clusters },
        { "plot_format", c.projection.plot_format } } },
  };
}

}  // namespace oodscore
