//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_DATASET_H_
#define OODSCORE_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace oodscore {

enum class MeasurementKind { kKi, kKd, kIC50 };

std::string_view to_string(MeasurementKind kind);
MeasurementKind parse_measurement_kind(std::string_view text);

// Binding affinity in pK units, i.e. -log10 of the molar Ki, Kd or IC50.
struct AffinityLabel {
  double pk_value = 0.0;
  MeasurementKind kind = MeasurementKind::kKd;
};

// Throws DomainError unless concentration_molar > 0 (and finite).
AffinityLabel pk_from_concentration(double concentration_molar,
                                    MeasurementKind kind);
double concentration_from_pk(double pk_value);

// Fixed-length, all-finite real vector.
class EmbeddingVector {
public:
  EmbeddingVector() = default;
  // Throws ValidationError on an empty or non-finite vector.
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const EmbeddingVector &,
                         const EmbeddingVector &) = default;

private:
  std::vector<double> values_;
};

struct ComplexRecord {
  std::string complex_id;
  AffinityLabel label;
  std::string cluster_id;
  std::optional<EmbeddingVector> interaction_embedding;
  std::optional<EmbeddingVector> ligand_embedding;
  std::optional<double> molecular_weight;  // Daltons
};

// Immutable, id-indexed collection of complexes.
class Dataset {
public:
  Dataset() = default;
  // Throws ValidationError on duplicate ids, empty cluster ids or
  // non-finite labels.
  explicit Dataset(std::vector<ComplexRecord> records,
                   std::string provenance = {});

  std::span<const ComplexRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::string &provenance() const noexcept { return provenance_; }

  const ComplexRecord *find(std::string_view complex_id) const;
  // Throws ValidationError naming the id when absent.
  const ComplexRecord &at(std::string_view complex_id) const;
  bool contains(std::string_view complex_id) const {
    return find(complex_id) != nullptr;
  }

  // Cluster id -> sorted member ids.
  std::map<std::string, std::vector<std::string>> clusters() const;

  // Resolves ids to records in the given order. Throws on unknown ids.
  std::vector<const ComplexRecord *>
  resolve(std::span<const std::string> ids) const;

private:
  std::vector<ComplexRecord> records_;
  std::string provenance_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

nlohmann::json to_json(const Dataset &dataset);
Dataset dataset_from_json(const nlohmann::json &doc);

void save_dataset(const Dataset &dataset, const std::filesystem::path &path);
Dataset load_dataset(const std::filesystem::path &path);

// Pairwise ligand / pose / pocket similarity between two complexes.
struct SimilarityRecord {
  std::string id_a;
  std::string id_b;
  double ligand_similarity = 0.0;
  double pose_similarity = 0.0;
  double pocket_similarity = 0.0;
};

// Reads "id_a,id_b,ligand_sim,pose_sim,pocket_sim". Throws on self pairs and
// scores outside [0,1].
std::vector<SimilarityRecord>
read_similarity_csv(const std::filesystem::path &path);

using EmbeddingTable = std::map<std::string, EmbeddingVector, std::less<>>;

// Reads either a CSV file "complex_id,v0,...,v{d-1}" or a directory holding
// one "<complex_id>.csv" / "<complex_id>.txt" file per complex with d values
// separated by commas or whitespace. Every vector must have `dimension`
// entries.
EmbeddingTable read_embeddings(const std::filesystem::path &path,
                               std::size_t dimension);

struct EmbeddingSource {
  std::filesystem::path path;
  std::size_t dimension = 32;
};

struct IngestOptions {
  std::filesystem::path complex_table;
  std::optional<EmbeddingSource> interaction;
  std::optional<EmbeddingSource> ligand;
  std::string provenance;
};

struct EmbeddingCoverage {
  std::size_t embedded = 0;
  std::vector<std::string> absent_ids;
  // Ids present in the embedding source but not in the complex table.
  std::vector<std::string> orphan_ids;
};

struct IngestionReport {
  std::size_t n_rows = 0;
  std::optional<EmbeddingCoverage> interaction;
  std::optional<EmbeddingCoverage> ligand;
};

nlohmann::json to_json(const IngestionReport &report);

struct IngestResult {
  Dataset dataset;
  IngestionReport report;
};

// Joins the complex table with the embedding sources. Records whose
// embedding is missing are kept with an absent embedding and listed in the
// report.
IngestResult ingest_dataset(const IngestOptions &options);

}  // namespace oodscore

#endif  // OODSCORE_DATASET_H_
