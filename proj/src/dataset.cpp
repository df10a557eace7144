//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "oodscore/csv.h"
#include "oodscore/errors.h"

namespace oodscore {

std::string_view to_string(MeasurementKind kind) {
  switch (kind) {
  case MeasurementKind::kKi:
    return "Ki";
  case MeasurementKind::kKd:
    return "Kd";
  case MeasurementKind::kIC50:
    return "IC50";
  }
  return "?";
}

MeasurementKind parse_measurement_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ki")
    return MeasurementKind::kKi;
  if (lower == "kd")
    return MeasurementKind::kKd;
  if (lower == "ic50")
    return MeasurementKind::kIC50;
  throw ValidationError("unknown measurement kind '" + std::string(text)
                        + "' (expected Ki, Kd or IC50)");
}

AffinityLabel pk_from_concentration(double concentration_molar,
                                    MeasurementKind kind) {
  if (!(concentration_molar > 0) || !std::isfinite(concentration_molar)) {
    throw DomainError("concentration must be a positive finite molar value, got "
                      + format_double(concentration_molar));
  }
  return { -std::log10(concentration_molar), kind };
}

double concentration_from_pk(double pk_value) {
  return std::pow(10.0, -pk_value);
}

EmbeddingVector::EmbeddingVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty())
    throw ValidationError("embedding vector must have positive dimension");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("embedding entry " + std::to_string(i)
                            + " is not finite");
    }
  }
}

Dataset::Dataset(std::vector<ComplexRecord> records, std::string provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto &r = records_[i];
    if (r.complex_id.empty())
      throw ValidationError("record " + std::to_string(i) + " has an empty id");
    if (r.cluster_id.empty())
      throw ValidationError("record " + r.complex_id
                            + " has an empty cluster_id");
    if (!std::isfinite(r.label.pk_value))
      throw ValidationError("record " + r.complex_id + " has a non-finite pK");
    if (!index_.emplace(r.complex_id, i).second)
      throw ValidationError("duplicate complex_id " + r.complex_id);
  }
}

const ComplexRecord *Dataset::find(std::string_view complex_id) const {
  auto it = index_.find(complex_id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

const ComplexRecord &Dataset::at(std::string_view complex_id) const {
  const auto *r = find(complex_id);
  if (r == nullptr)
    throw ValidationError("unknown complex_id " + std::string(complex_id));
  return *r;
}

std::map<std::string, std::vector<std::string>> Dataset::clusters() const {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto &r: records_)
    out[r.cluster_id].push_back(r.complex_id);
  for (auto &[_, ids]: out)
    std::sort(ids.begin(), ids.end());
  return out;
}

std::vector<const ComplexRecord *>
Dataset::resolve(std::span<const std::string> ids) const {
  std::vector<const ComplexRecord *> out;
  out.reserve(ids.size());
  for (const auto &id: ids)
    out.push_back(&at(id));
  return out;
}

namespace {
nlohmann::json embedding_json(const std::optional<EmbeddingVector> &e) {
  if (!e)
    return nullptr;
  return std::vector<double>(e->values().begin(), e->values().end());
}

std::optional<EmbeddingVector> embedding_from_json(const nlohmann::json &j) {
  if (j.is_null())
    return std::nullopt;
  return EmbeddingVector(j.get<std::vector<double>>());
}
}  // namespace

nlohmann::json to_json(const Dataset &dataset) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto &r: dataset.records()) {
    records.push_back({
        { "complex_id", r.complex_id },
        { "pk", r.label.pk_value },
        { "kind", to_string(r.label.kind) },
        { "cluster_id", r.cluster_id },
        { "interaction", embedding_json(r.interaction_embedding) },
        { "ligand", embedding_json(r.ligand_embedding) },
        { "molecular_weight", r.molecular_weight
                                  ? nlohmann::json(*r.molecular_weight)
                                  : nlohmann::json(nullptr) },
    });
  }
  return {
    { "provenance", dataset.provenance() },
    { "records", std::move(records) },
  };
}

Dataset dataset_from_json(const nlohmann::json &doc) {
  try {
    std::vector<ComplexRecord> records;
    for (const auto &j: doc.at("records")) {
      ComplexRecord r;
      r.complex_id = j.at("complex_id").get<std::string>();
      r.label.pk_value = j.at("pk").get<double>();
      r.label.kind = parse_measurement_kind(j.at("kind").get<std::string>());
      r.cluster_id = j.at("cluster_id").get<std::string>();
      r.interaction_embedding = embedding_from_json(j.at("interaction"));
      r.ligand_embedding = embedding_from_json(j.at("ligand"));
      if (!j.at("molecular_weight").is_null())
        r.molecular_weight = j.at("molecular_weight").get<double>();
      records.push_back(std::move(r));
    }
    return Dataset(std::move(records), doc.at("provenance").get<std::string>());
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("malformed dataset document: ") + e.what());
  }
}

void save_dataset(const Dataset &dataset, const std::filesystem::path &path) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs)
    throw Error("cannot write " + path.string());
  ofs << to_json(dataset).dump(1) << '\n';
}

Dataset load_dataset(const std::filesystem::path &path) {
  std::ifstream ifs(path, std::ios::binary);
  if (!ifs)
    throw PrerequisiteError("cannot open dataset store " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ifs);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return dataset_from_json(doc);
}

std::vector<SimilarityRecord>
read_similarity_csv(const std::filesystem::path &path) {
  const CsvTable table = read_csv_file(path);
  const std::string src = path.string();
  const std::size_t ca = table.require_column("id_a", src),
                    cb = table.require_column("id_b", src),
                    cl = table.require_column("ligand_sim", src),
                    cp = table.require_column("pose_sim", src),
                    ck = table.require_column("pocket_sim", src);

  std::vector<SimilarityRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto &row = table.rows[i];
    const std::string where = src + ":" + std::to_string(table.line_numbers[i]);
    SimilarityRecord rec;
    rec.id_a = row[ca];
    rec.id_b = row[cb];
    if (rec.id_a.empty() || rec.id_b.empty())
      throw ValidationError(where + ": empty id");
    if (rec.id_a == rec.id_b)
      throw ValidationError(where + ": self similarity for " + rec.id_a);
    double *slots[] = { &rec.ligand_similarity, &rec.pose_similarity,
                        &rec.pocket_similarity };
    const std::size_t cols[] = { cl, cp, ck };
    for (int k = 0; k < 3; ++k) {
      auto v = parse_double(row[cols[k]]);
      if (!v || !(*v >= 0.0 && *v <= 1.0)) {
        throw ValidationError(where + ": similarity '" + row[cols[k]]
                              + "' is not a number in [0,1]");
      }
      *slots[k] = *v;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {
std::vector<double> parse_vector_fields(std::span<const std::string> fields,
                                        const std::string &where) {
  std::vector<double> values;
  values.reserve(fields.size());
  for (const auto &f: fields) {
    auto v = parse_double(f);
    if (!v)
      throw ValidationError(where + ": malformed embedding value '" + f + "'");
    values.push_back(*v);
  }
  return values;
}

EmbeddingVector make_embedding(std::vector<double> values,
                               std::size_t dimension, const std::string &where) {
  if (values.size() != dimension) {
    throw ValidationError(where + ": embedding has "
                          + std::to_string(values.size())
                          + " values, expected dimension "
                          + std::to_string(dimension));
  }
  try {
    return EmbeddingVector(std::move(values));
  } catch (const ValidationError &e) {
    throw ValidationError(where + ": " + e.what());
  }
}

EmbeddingTable read_embedding_csv(const std::filesystem::path &path,
                                  std::size_t dimension) {
  const CsvTable table = read_csv_file(path);
  const std::string src = path.string();
  const std::size_t cid = table.require_column("complex_id", src);
  if (table.header.size() - 1 != dimension) {
    throw ValidationError(src + ": header declares "
                          + std::to_string(table.header.size() - 1)
                          + " vector columns, expected dimension "
                          + std::to_string(dimension));
  }
  EmbeddingTable out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto &row = table.rows[i];
    const std::string where = src + ":" + std::to_string(table.line_numbers[i]);
    std::vector<std::string> fields;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c != cid)
        fields.push_back(row[c]);
    }
    auto vec = make_embedding(parse_vector_fields(fields, where), dimension,
                              where);
    if (!out.emplace(row[cid], std::move(vec)).second)
      throw ValidationError(where + ": duplicate embedding id " + row[cid]);
  }
  return out;
}

EmbeddingTable read_embedding_dir(const std::filesystem::path &dir,
                                  std::size_t dimension) {
  std::vector<std::filesystem::path> files;
  for (const auto &entry: std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file())
      continue;
    const auto ext = entry.path().extension();
    if (ext == ".csv" || ext == ".txt" || ext == ".vec")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  EmbeddingTable out;
  for (const auto &file: files) {
    std::ifstream ifs(file);
    std::stringstream ss;
    ss << ifs.rdbuf();
    std::string text = ss.str();
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream tokens(text);
    std::vector<std::string> fields;
    for (std::string tok; tokens >> tok;)
      fields.push_back(tok);
    const std::string where = file.string();
    auto vec = make_embedding(parse_vector_fields(fields, where), dimension,
                              where);
    if (!out.emplace(file.stem().string(), std::move(vec)).second)
      throw ValidationError(where + ": duplicate embedding id "
                            + file.stem().string());
  }
  return out;
}
}  // namespace

EmbeddingTable read_embeddings(const std::filesystem::path &path,
                               std::size_t dimension) {
  if (dimension == 0)
    throw ValidationError("embedding dimension must be positive");
  if (std::filesystem::is_directory(path))
    return read_embedding_dir(path, dimension);
  return read_embedding_csv(path, dimension);
}

nlohmann::json to_json(const IngestionReport &report) {
  auto coverage = [](const std::optional<EmbeddingCoverage> &c) {
    if (!c)
      return nlohmann::json(nullptr);
    return nlohmann::json {
      { "embedded", c->embedded },
      { "absent", c->absent_ids.size() },
      { "absent_ids", c->absent_ids },
      { "orphan_ids", c->orphan_ids },
    };
  };
  return {
    { "n_rows", report.n_rows },
    { "interaction", coverage(report.interaction) },
    { "ligand", coverage(report.ligand) },
  };
}

namespace {
std::optional<EmbeddingCoverage>
attach(std::vector<ComplexRecord> &records,
       const std::optional<EmbeddingSource> &source,
       std::optional<EmbeddingVector> ComplexRecord::*slot) {
  if (!source)
    return std::nullopt;
  EmbeddingTable table = read_embeddings(source->path, source->dimension);
  EmbeddingCoverage cov;
  std::set<std::string, std::less<>> used;
  for (auto &r: records) {
    auto it = table.find(r.complex_id);
    if (it == table.end()) {
      cov.absent_ids.push_back(r.complex_id);
    } else {
      r.*slot = it->second;
      used.insert(it->first);
      ++cov.embedded;
    }
  }
  for (const auto &[id, _]: table) {
    if (!used.contains(id))
      cov.orphan_ids.push_back(id);
  }
  return cov;
}
}  // namespace

IngestResult ingest_dataset(const IngestOptions &options) {
  const CsvTable table = read_csv_file(options.complex_table);
  const std::string src = options.complex_table.string();
  const std::size_t cid = table.require_column("complex_id", src),
                    cpk = table.require_column("pk_value", src),
                    ckind = table.require_column("measurement_kind", src),
                    ccl = table.require_column("cluster_id", src);
  const auto cmw = table.column("molecular_weight");

  std::vector<ComplexRecord> records;
  records.reserve(table.rows.size());
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto &row = table.rows[i];
    const std::string where = src + ": row "
                              + std::to_string(table.line_numbers[i]);
    ComplexRecord r;
    r.complex_id = row[cid];
    if (r.complex_id.empty())
      throw ValidationError(where + ": empty complex_id");
    if (!seen.insert(r.complex_id).second)
      throw ValidationError(where + ": duplicate complex_id " + r.complex_id);

    auto pk = parse_double(row[cpk]);
    if (!pk || !std::isfinite(*pk)) {
      throw ValidationError(where + " (" + r.complex_id + "): malformed pk_value '"
                            + row[cpk] + "'");
    }
    r.label.pk_value = *pk;
    try {
      r.label.kind = parse_measurement_kind(row[ckind]);
    } catch (const ValidationError &e) {
      throw ValidationError(where + " (" + r.complex_id + "): " + e.what());
    }
    r.cluster_id = row[ccl];
    if (r.cluster_id.empty())
      throw ValidationError(where + " (" + r.complex_id + "): empty cluster_id");
    if (cmw && !row[*cmw].empty()) {
      auto mw = parse_double(row[*cmw]);
      if (!mw || !std::isfinite(*mw) || *mw <= 0) {
        throw ValidationError(where + " (" + r.complex_id
                              + "): malformed molecular_weight '" + row[*cmw]
                              + "'");
      }
      r.molecular_weight = *mw;
    }
    records.push_back(std::move(r));
  }

  IngestionReport report;
  report.n_rows = records.size();
  report.interaction = attach(records, options.interaction,
                              &ComplexRecord::interaction_embedding);
  report.ligand = attach(records, options.ligand,
                         &ComplexRecord::ligand_embedding);
  return { Dataset(std::move(records), options.provenance), std::move(report) };
}

}  // namespace oodscore
