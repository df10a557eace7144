//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "oodscore/csv.h"
#include "oodscore/errors.h"
#include "oodscore/metrics.h"
#include "oodscore/rng.h"

namespace oodscore {

std::string_view to_string(LabelModel model) {
  switch (model) {
  case LabelModel::kGlobalLinear:
    return "global_linear";
  case LabelModel::kPerClusterShift:
    return "per_cluster_shift";
  case LabelModel::kMidTrainingPeakSurrogate:
    return "mid_training_peak_surrogate";
  }
  return "?";
}

LabelModel parse_label_model(std::string_view text) {
  if (text == "global_linear")
    return LabelModel::kGlobalLinear;
  if (text == "per_cluster_shift")
    return LabelModel::kPerClusterShift;
  if (text == "mid_training_peak_surrogate")
    return LabelModel::kMidTrainingPeakSurrogate;
  throw ValidationError("unknown label model '" + std::string(text) + "'");
}

void GeneratorSpec::validate() const {
  if (n_clusters < 1)
    throw ValidationError("generator: n_clusters must be >= 1");
  if (cluster_sizes.size() != static_cast<std::size_t>(n_clusters))
    throw ValidationError("generator: cluster_sizes must have n_clusters "
                          "entries");
  for (int s: cluster_sizes) {
    if (s < 1)
      throw ValidationError("generator: cluster sizes must be >= 1");
  }
  if (embedding_dim < 1)
    throw ValidationError("generator: embedding_dim must be positive");
  if (label_model == LabelModel::kMidTrainingPeakSurrogate && embedding_dim < 3)
    throw ValidationError("generator: surrogate needs embedding_dim >= 3");
  if (!(noise_std >= 0) || !(ood_shift_magnitude >= 0))
    throw ValidationError("generator: noise_std and ood_shift_magnitude must "
                          "be >= 0");
  for (int c: ood_clusters) {
    if (c < 0 || c >= n_clusters)
      throw ValidationError("generator: OOD cluster index out of range");
  }
}

std::vector<int> GeneratorSpec::resolved_ood_clusters() const {
  if (ood_clusters.empty())
    return { n_clusters - 1 };
  return ood_clusters;
}

nlohmann::json to_json(const GeneratorSpec &s) {
  return {
    { "n_clusters", s.n_clusters },
    { "cluster_sizes", s.cluster_sizes },
    { "embedding_dim", s.embedding_dim },
    { "ligand_dim", s.ligand_dim },
    { "label_model", to_string(s.label_model) },
    { "noise_std", s.noise_std },
    { "ood_shift_magnitude", s.ood_shift_magnitude },
    { "seed", s.seed },
    { "ood_clusters", s.ood_clusters },
    { "center_scale", s.center_scale },
    { "within_scale", s.within_scale },
    { "intercept", s.intercept },
    { "slow_scale", s.slow_scale },
    { "slow_weight", s.slow_weight },
  };
}

GeneratorSpec generator_spec_from_json(const nlohmann::json &doc) {
  GeneratorSpec s;
  if (!doc.is_object())
    throw ValidationError("generator spec must be an object");
  for (const auto &[key, v]: doc.items()) {
    try {
      if (key == "n_clusters")
        s.n_clusters = v.get<int>();
      else if (key == "cluster_sizes")
        s.cluster_sizes = v.get<std::vector<int>>();
      else if (key == "embedding_dim")
        s.embedding_dim = v.get<std::size_t>();
      else if (key == "ligand_dim")
        s.ligand_dim = v.get<std::size_t>();
      else if (key == "label_model")
        s.label_model = parse_label_model(v.get<std::string>());
      else if (key == "noise_std")
        s.noise_std = v.get<double>();
      else if (key == "ood_shift_magnitude")
        s.ood_shift_magnitude = v.get<double>();
      else if (key == "seed")
        s.seed = v.get<std::uint64_t>();
      else if (key == "ood_clusters")
        s.ood_clusters = v.get<std::vector<int>>();
      else if (key == "center_scale")
        s.center_scale = v.get<double>();
      else if (key == "within_scale")
        s.within_scale = v.get<double>();
      else if (key == "intercept")
        s.intercept = v.get<double>();
      else if (key == "slow_scale")
        s.slow_scale = v.get<double>();
      else if (key == "slow_weight")
        s.slow_weight = v.get<double>();
      else
        throw ValidationError("unknown key");
    } catch (const nlohmann::json::exception &e) {
      throw ValidationError("generator." + key + ": " + e.what());
    } catch (const ValidationError &e) {
      throw ValidationError("generator." + key + ": " + e.what());
    }
  }
  if (s.cluster_sizes.empty() && s.n_clusters > 0)
    s.cluster_sizes.assign(static_cast<std::size_t>(s.n_clusters), 50);
  s.validate();
  return s;
}

bool GroundTruth::is_ood(const std::string &cluster_id) const {
  return std::find(ood_cluster_ids.begin(), ood_cluster_ids.end(), cluster_id)
         != ood_cluster_ids.end();
}

namespace {
double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

std::span<const double> interaction_of(const ComplexRecord &r) {
  if (!r.interaction_embedding)
    throw MissingEmbeddingError(r.complex_id, "complex " + r.complex_id
                                                  + " has no interaction "
                                                    "embedding");
  return r.interaction_embedding->values();
}

std::vector<double> normal_vector(Rng &rng, std::size_t d, double sd) {
  std::normal_distribution<double> n(0.0, sd);
  std::vector<double> v(d);
  for (auto &x: v)
    x = n(rng);
  return v;
}

// Removes the components along each (unit) direction in `basis`.
void project_out(std::vector<double> &v,
                 const std::vector<std::vector<double>> &basis) {
  for (const auto &b: basis) {
    const double c = dot(v, b);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] -= c * b[i];
  }
}

void normalize(std::vector<double> &v) {
  const double n = std::sqrt(dot(v, v));
  for (auto &x: v)
    x /= n;
}

std::string two_digits(int v, int width) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%0*d", width, v);
  return buf;
}
}  // namespace

double GroundTruth::noiseless_label(const ComplexRecord &record) const {
  auto it = cluster_weights.find(record.cluster_id);
  const auto &w = it == cluster_weights.end() ? weights : it->second;
  return dot(w, interaction_of(record)) + intercept;
}

double GroundTruth::global_prediction(const ComplexRecord &record) const {
  return dot(weights, interaction_of(record)) + intercept;
}

nlohmann::json to_json(const GroundTruth &t) {
  return {
    { "label_model", to_string(t.label_model) },
    { "weights", t.weights },
    { "intercept", t.intercept },
    { "noise_std", t.noise_std },
    { "cluster_ids", t.cluster_ids },
    { "ood_cluster_ids", t.ood_cluster_ids },
    { "cluster_weights", t.cluster_weights },
  };
}

SyntheticData generate(const GeneratorSpec &spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "generate"));
  const std::size_t d = spec.embedding_dim;
  const bool surrogate = spec.label_model == LabelModel::kMidTrainingPeakSurrogate;
  std::normal_distribution<double> std_normal(0.0, 1.0);

  GroundTruth truth;
  truth.label_model = spec.label_model;
  truth.intercept = spec.intercept;
  truth.noise_std = spec.noise_std;

  // Surrogate directions: fast (high variance) and slow (low variance).
  std::vector<double> fast, slow;
  if (surrogate) {
    fast = normal_vector(rng, d, 1.0);
    normalize(fast);
    slow = normal_vector(rng, d, 1.0);
    project_out(slow, { fast });
    normalize(slow);
    truth.weights.resize(d);
    for (std::size_t i = 0; i < d; ++i)
      truth.weights[i] = fast[i] + spec.slow_weight * slow[i];
  } else {
    truth.weights = normal_vector(rng, d, 1.0 / std::sqrt(static_cast<double>(d)));
  }

  const auto ood = spec.resolved_ood_clusters();
  for (int c = 0; c < spec.n_clusters; ++c)
    truth.cluster_ids.push_back("C" + two_digits(c, 3));
  for (int c: ood)
    truth.ood_cluster_ids.push_back(truth.cluster_ids[static_cast<std::size_t>(c)]);

  for (int c = 0; c < spec.n_clusters; ++c) {
    const auto &cid = truth.cluster_ids[static_cast<std::size_t>(c)];
    std::vector<double> w = truth.weights;
    const bool is_ood = truth.is_ood(cid);
    if (spec.label_model == LabelModel::kPerClusterShift) {
      // Drawn for every cluster so the stream does not depend on which
      // clusters are OOD.
      auto delta = normal_vector(rng, d, 1.0 / std::sqrt(static_cast<double>(d)));
      if (is_ood) {
        for (std::size_t i = 0; i < d; ++i)
          w[i] += spec.ood_shift_magnitude * delta[i];
      }
    } else if (surrogate && is_ood) {
      for (std::size_t i = 0; i < d; ++i)
        w[i] -= 2.0 * spec.ood_shift_magnitude * spec.slow_weight * slow[i];
    }
    truth.cluster_weights[cid] = std::move(w);
  }

  // Ligand embeddings are a fixed random linear image of the interaction
  // embedding plus noise.
  std::vector<std::vector<double>> ligand_map;
  for (std::size_t j = 0; j < spec.ligand_dim; ++j)
    ligand_map.push_back(normal_vector(rng, d, 1.0 / std::sqrt(static_cast<double>(d))));
  const auto mw_dir = normal_vector(rng, d, 1.0 / std::sqrt(static_cast<double>(d)));

  std::vector<ComplexRecord> records;
  for (int c = 0; c < spec.n_clusters; ++c) {
    const auto &cid = truth.cluster_ids[static_cast<std::size_t>(c)];
    auto center = normal_vector(rng, d, spec.center_scale);
    if (surrogate)
      project_out(center, { slow });
    const auto &w = truth.cluster_weights.at(cid);

    for (int k = 0; k < spec.cluster_sizes[static_cast<std::size_t>(c)]; ++k) {
      std::vector<double> e(d);
      if (surrogate) {
        auto iso = normal_vector(rng, d, 0.5 * spec.within_scale);
        project_out(iso, { fast, slow });
        const double a = std_normal(rng) * spec.within_scale;
        const double b = std_normal(rng) * spec.slow_scale;
        for (std::size_t i = 0; i < d; ++i)
          e[i] = center[i] + a * fast[i] + b * slow[i] + iso[i];
      } else {
        for (std::size_t i = 0; i < d; ++i)
          e[i] = center[i] + spec.within_scale * std_normal(rng);
      }
      const double noise = spec.noise_std > 0 ? spec.noise_std * std_normal(rng)
                                              : 0.0;

      ComplexRecord r;
      r.complex_id = cid + "_" + two_digits(k, 4);
      r.cluster_id = cid;
      r.label.pk_value = dot(w, e) + spec.intercept + noise;
      r.label.kind = MeasurementKind::kKd;
      if (spec.ligand_dim > 0) {
        std::vector<double> lig(spec.ligand_dim);
        for (std::size_t j = 0; j < spec.ligand_dim; ++j)
          lig[j] = dot(ligand_map[j], e) + 0.1 * std_normal(rng);
        r.ligand_embedding = EmbeddingVector(std::move(lig));
      }
      r.molecular_weight = std::max(120.0, 420.0 + 90.0 * dot(mw_dir, e));
      r.interaction_embedding = EmbeddingVector(std::move(e));
      records.push_back(std::move(r));
    }
  }
  return { Dataset(std::move(records),
                   "synthetic:" + std::string(to_string(spec.label_model))
                       + ":seed=" + std::to_string(spec.seed)),
           std::move(truth) };
}

namespace {
void write_embedding_csv(const Dataset &ds, const std::filesystem::path &path,
                         std::optional<EmbeddingVector> ComplexRecord::*slot) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw Error("cannot write " + path.string());
  std::size_t dim = 0;
  for (const auto &r: ds.records()) {
    if ((r.*slot).has_value()) {
      dim = (r.*slot)->dimension();
      break;
    }
  }
  os << "complex_id";
  for (std::size_t i = 0; i < dim; ++i)
    os << ",v" << i;
  os << '\n';
  for (const auto &r: ds.records()) {
    if (!(r.*slot))
      continue;
    os << r.complex_id;
    for (double v: (r.*slot)->values())
      os << ',' << format_double(v);
    os << '\n';
  }
}
}  // namespace

void write_synthetic_files(const SyntheticData &data,
                           const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "complex_table.csv", std::ios::binary);
    if (!os)
      throw Error("cannot write " + (dir / "complex_table.csv").string());
    os << "complex_id,pk_value,measurement_kind,cluster_id,molecular_weight\n";
    for (const auto &r: data.dataset.records()) {
      os << r.complex_id << ',' << format_double(r.label.pk_value) << ','
         << to_string(r.label.kind) << ',' << r.cluster_id << ','
         << (r.molecular_weight ? format_double(*r.molecular_weight) : "")
         << '\n';
    }
  }
  write_embedding_csv(data.dataset, dir / "interaction.csv",
                      &ComplexRecord::interaction_embedding);
  const bool has_ligand = std::any_of(
      data.dataset.records().begin(), data.dataset.records().end(),
      [](const ComplexRecord &r) { return r.ligand_embedding.has_value(); });
  if (has_ligand) {
    write_embedding_csv(data.dataset, dir / "ligand.csv",
                        &ComplexRecord::ligand_embedding);
  }
  std::ofstream os(dir / "truth.json", std::ios::binary);
  os << to_json(data.truth).dump(1) << '\n';
}

double oracle_pearson(const GroundTruth &truth, RecordSpan records) {
  std::vector<double> p, y;
  for (const auto *r: records) {
    p.push_back(truth.global_prediction(*r));
    y.push_back(r->label.pk_value);
  }
  return pearson(p, y);
}

BehaviorCheck expected_behavior_check(const TrainedEnsemble &ensemble,
                                      double ood_shift_magnitude,
                                      RecordSpan id_records,
                                      RecordSpan ood_records,
                                      const BehaviorThresholds &thresholds) {
  auto score = [&](RecordSpan records) {
    const auto pred = ensemble_predict(ensemble, records);
    std::vector<double> p, y;
    for (const auto *r: records) {
      p.push_back(pred.at(r->complex_id));
      y.push_back(r->label.pk_value);
    }
    return pearson(p, y);
  };

  BehaviorCheck check;
  check.id_pearson = score(id_records);
  check.ood_pearson = score(ood_records);
  check.required = ood_shift_magnitude > thresholds.shift_threshold;
  const double gap = check.id_pearson - check.ood_pearson;
  if (!check.required) {
    check.passed = true;
  } else {
    check.passed = check.id_pearson >= thresholds.min_id_pearson
                   && gap >= thresholds.min_gap;
  }
  check.diagnostics = "id_r=" + format_double(check.id_pearson)
                      + " ood_r=" + format_double(check.ood_pearson)
                      + " gap=" + format_double(gap)
                      + (check.required ? " (gap required)" : " (gap not required)");
  return check;
}

}  // namespace oodscore
