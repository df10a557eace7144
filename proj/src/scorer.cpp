//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/scorer.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "oodscore/errors.h"
#include "oodscore/metrics.h"
#include "oodscore/rng.h"

namespace oodscore {

std::string_view to_string(ScorerKind kind) {
  return kind == ScorerKind::kEmbeddingMlp ? "embedding_mlp" : "fusion";
}

ScorerKind parse_scorer_kind(std::string_view text) {
  if (text == "embedding_mlp")
    return ScorerKind::kEmbeddingMlp;
  if (text == "fusion")
    return ScorerKind::kFusion;
  throw ValidationError("unknown scorer kind '" + std::string(text)
                        + "' (expected embedding_mlp or fusion)");
}

void ScorerConfig::validate() const {
  if (hidden_sizes.empty())
    throw ValidationError("scorer: hidden_sizes must be non-empty");
  for (auto h: hidden_sizes) {
    if (h == 0)
      throw ValidationError("scorer: hidden sizes must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ValidationError("scorer: dropout_rate must lie in [0,1)");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ValidationError("scorer: learning_rate must be positive");
  if (max_epochs < 1)
    throw ValidationError("scorer: max_epochs must be positive");
  if (patience < 1)
    throw ValidationError("scorer: patience must be positive");
  if (patience > max_epochs)
    throw ValidationError("scorer: patience must not exceed max_epochs");
  if (batch_size < 1)
    throw ValidationError("scorer: batch_size must be positive");
}

nlohmann::json to_json(const ScorerConfig &c) {
  return {
    { "scorer_kind", to_string(c.kind) },
    { "hidden_sizes", c.hidden_sizes },
    { "activation", to_string(c.activation) },
    { "dropout_rate", c.dropout_rate },
    { "learning_rate", c.learning_rate },
    { "max_epochs", c.max_epochs },
    { "patience", c.patience },
    { "batch_size", c.batch_size },
    { "seed", c.seed },
  };
}

ScorerConfig scorer_config_from_json(const nlohmann::json &doc,
                                     ScorerConfig c) {
  if (!doc.is_object())
    throw ValidationError("scorer config must be an object");
  for (const auto &[key, value]: doc.items()) {
    try {
      if (key == "scorer_kind")
        c.kind = parse_scorer_kind(value.get<std::string>());
      else if (key == "hidden_sizes")
        c.hidden_sizes = value.get<std::vector<std::size_t>>();
      else if (key == "activation")
        c.activation = parse_activation(value.get<std::string>());
      else if (key == "dropout_rate")
        c.dropout_rate = value.get<double>();
      else if (key == "learning_rate")
        c.learning_rate = value.get<double>();
      else if (key == "max_epochs")
        c.max_epochs = value.get<int>();
      else if (key == "patience")
        c.patience = value.get<int>();
      else if (key == "batch_size")
        c.batch_size = value.get<int>();
      else if (key == "seed")
        c.seed = value.get<std::uint64_t>();
      else
        throw ValidationError("unknown key");
    } catch (const nlohmann::json::exception &e) {
      throw ValidationError("scorer." + key + ": " + e.what());
    } catch (const ValidationError &e) {
      throw ValidationError("scorer." + key + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

bool has_required_embeddings(const ComplexRecord &record, ScorerKind kind) {
  if (!record.interaction_embedding)
    return false;
  return kind == ScorerKind::kEmbeddingMlp || record.ligand_embedding.has_value();
}

std::vector<double> build_features(const ComplexRecord &record,
                                   ScorerKind kind) {
  if (!record.interaction_embedding) {
    throw MissingEmbeddingError(record.complex_id,
                                "complex " + record.complex_id
                                    + " has no interaction embedding");
  }
  const auto inter = record.interaction_embedding->values();
  if (kind == ScorerKind::kEmbeddingMlp)
    return { inter.begin(), inter.end() };

  if (!record.ligand_embedding) {
    throw MissingEmbeddingError(record.complex_id,
                                "complex " + record.complex_id
                                    + " has no ligand embedding");
  }
  const auto lig = record.ligand_embedding->values();
  std::vector<double> out;
  out.reserve(lig.size() + inter.size());
  out.insert(out.end(), lig.begin(), lig.end());
  out.insert(out.end(), inter.begin(), inter.end());
  return out;
}

Standardizer Standardizer::fit(const FeatureMatrix &x) {
  Standardizer s;
  s.mean.assign(x.cols, 0.0);
  s.scale.assign(x.cols, 1.0);
  if (x.rows == 0)
    return s;
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols; ++c)
      s.mean[c] += row[c];
  }
  for (auto &m: s.mean)
    m /= static_cast<double>(x.rows);
  std::vector<double> var(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols; ++c) {
      const double d = row[c] - s.mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < x.cols; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(x.rows));
    s.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

void Standardizer::apply(FeatureMatrix &x) const {
  if (x.cols != mean.size())
    throw ValidationError("standardizer: dimension mismatch");
  for (std::size_t r = 0; r < x.rows; ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols; ++c)
      row[c] = (row[c] - mean[c]) / scale[c];
  }
}

const EpochRecord &TrainedScorer::best_record() const {
  for (const auto &rec: history) {
    if (rec.epoch == best_epoch)
      return rec;
  }
  throw ValidationError("scorer history does not contain the best epoch");
}

double TrainedScorer::predict_one(const ComplexRecord &record) const {
  auto feats = build_features(record, config.kind);
  if (feats.size() != input_dimension) {
    throw ValidationError("complex " + record.complex_id + ": feature dimension "
                          + std::to_string(feats.size()) + " does not match "
                          + "model input dimension "
                          + std::to_string(input_dimension));
  }
  for (std::size_t c = 0; c < feats.size(); ++c)
    feats[c] = (feats[c] - standardizer.mean[c]) / standardizer.scale[c];
  const double p = network.predict(feats);
  if (!std::isfinite(p))
    throw Error("non-finite prediction for " + record.complex_id);
  return p;
}

void AccessAudit::merge(const AccessAudit &other) {
  gradient_ids.insert(other.gradient_ids.begin(), other.gradient_ids.end());
  validation_ids.insert(other.validation_ids.begin(),
                        other.validation_ids.end());
  eval_ids.insert(other.eval_ids.begin(), other.eval_ids.end());
}

namespace {
FeatureMatrix feature_matrix(RecordSpan records, ScorerKind kind) {
  FeatureMatrix x;
  x.rows = records.size();
  for (std::size_t r = 0; r < records.size(); ++r) {
    auto f = build_features(*records[r], kind);
    if (r == 0) {
      x.cols = f.size();
      x.data.reserve(x.rows * x.cols);
    } else if (f.size() != x.cols) {
      throw ValidationError("complex " + records[r]->complex_id
                            + ": inconsistent feature dimension");
    }
    x.data.insert(x.data.end(), f.begin(), f.end());
  }
  return x;
}

std::vector<double> labels_of(RecordSpan records) {
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto *r: records)
    y.push_back(r->label.pk_value);
  return y;
}

std::vector<double> predict_matrix(const Mlp &net, const FeatureMatrix &x) {
  std::vector<double> out(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r)
    out[r] = net.predict(x.row(r));
  return out;
}

double pearson_or_nan(std::span<const double> p, std::span<const double> y) {
  try {
    return pearson(p, y);
  } catch (const UndefinedMetricError &) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

struct PreparedSet {
  FeatureMatrix x;
  std::vector<double> y;
};

PreparedSet prepare(RecordSpan records, const TrainedScorer &model) {
  PreparedSet s { feature_matrix(records, model.config.kind),
                  labels_of(records) };
  if (s.x.rows > 0 && s.x.cols != model.input_dimension)
    throw ValidationError("feature dimension does not match the model input");
  model.standardizer.apply(s.x);
  return s;
}
}  // namespace

TrainedScorer make_initial_scorer(RecordSpan train, const ScorerConfig &config) {
  config.validate();
  if (train.empty())
    throw ValidationError("fit: training set is empty");
  FeatureMatrix x = feature_matrix(train, config.kind);

  TrainedScorer model;
  model.config = config;
  model.input_dimension = x.cols;
  model.standardizer = Standardizer::fit(x);
  model.network = Mlp(x.cols, config.hidden_sizes, config.activation);
  Rng init_rng(derive_seed(config.seed, "init"));
  model.network.initialize(init_rng);
  const auto y = labels_of(train);
  model.network.output_bias() =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  return model;
}

TrainedScorer fit(RecordSpan train, RecordSpan validation,
                  const ScorerConfig &config, const FitOptions &options) {
  config.validate();
  if (train.empty())
    throw ValidationError("fit: training set is empty");
  if (validation.size() < 2)
    throw ValidationError("fit: validation set needs at least 2 records");

  TrainedScorer model;
  if (options.initial != nullptr) {
    model = *options.initial;
    if (model.config.kind != config.kind
        || model.config.hidden_sizes != config.hidden_sizes
        || model.config.activation != config.activation)
      throw ValidationError("fit: warm start architecture does not match config");
    model.config = config;
    model.history.clear();
  } else {
    model = make_initial_scorer(train, config);
  }

  const PreparedSet tr = prepare(train, model);
  const PreparedSet va = prepare(validation, model);
  std::vector<PreparedSet> evals;
  for (const auto &es: options.eval_sets)
    evals.push_back(prepare(es.records, model));

  if (options.audit != nullptr) {
    for (const auto *r: validation)
      options.audit->validation_ids.insert(r->complex_id);
    for (const auto &es: options.eval_sets) {
      for (const auto *r: es.records)
        options.audit->eval_ids.insert(r->complex_id);
    }
  }

  model.stop_metric = is_constant(va.y) ? StopMetric::kRmse
                                        : StopMetric::kPearson;

  Mlp &net = model.network;
  auto record_epoch = [&](int epoch, double train_loss) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss;
    const auto vp = predict_matrix(net, va.x);
    rec.val_pearson = pearson_or_nan(vp, va.y);
    rec.val_rmse = rmse(vp, va.y);
    for (std::size_t e = 0; e < evals.size(); ++e) {
      const auto &set = evals[e];
      double r = std::numeric_limits<double>::quiet_NaN();
      if (set.x.rows >= 2)
        r = pearson_or_nan(predict_matrix(net, set.x), set.y);
      rec.eval_pearson[options.eval_sets[e].name] = r;
    }
    model.history.push_back(std::move(rec));
    return model.history.back();
  };
  // Larger is better for both modes.
  auto score_of = [&](const EpochRecord &rec) {
    return model.stop_metric == StopMetric::kPearson ? rec.val_pearson
                                                     : -rec.val_rmse;
  };

  std::vector<std::size_t> order(tr.x.rows);
  std::iota(order.begin(), order.end(), 0);
  record_epoch(0, net.loss(tr.x, tr.y, order));
  model.best_epoch = 0;
  double best_score = score_of(model.history.back());
  if (std::isnan(best_score))
    best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> best_params(net.parameters().begin(),
                                  net.parameters().end());

  Rng rng(derive_seed(config.seed, "batches"));
  const double lr = options.learning_rate.value_or(config.learning_rate);
  if (!(lr >= 0.0) || !std::isfinite(lr))
    throw ValidationError("fit: learning rate must be finite and >= 0");
  Adam adam(net.parameter_count(), lr);
  std::vector<double> grad(net.parameter_count());
  const std::size_t bs = static_cast<std::size_t>(config.batch_size);
  int since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t len = std::min(bs, order.size() - start);
      std::span<const std::size_t> batch(order.data() + start, len);
      const double l = net.loss_and_gradient(tr.x, tr.y, batch, grad,
                                             config.dropout_rate, &rng);
      if (!std::isfinite(l)) {
        throw TrainingError("fit: non-finite loss at epoch "
                            + std::to_string(epoch) + ", batch starting at "
                            + std::to_string(start)
                            + "; try a smaller learning rate");
      }
      adam.step(net.parameters(), grad);
      total += l * static_cast<double>(len);
      if (options.audit != nullptr) {
        for (auto idx: batch)
          options.audit->gradient_ids.insert(train[idx]->complex_id);
      }
    }
    const auto &rec = record_epoch(epoch,
                                   total / static_cast<double>(order.size()));

    const double s = score_of(rec);
    if (!std::isnan(s) && s > best_score) {
      best_score = s;
      model.best_epoch = epoch;
      best_params.assign(net.parameters().begin(), net.parameters().end());
      since_best = 0;
    } else {
      ++since_best;
    }
    if (options.early_stopping && since_best >= config.patience)
      break;
  }

  if (options.early_stopping) {
    std::copy(best_params.begin(), best_params.end(),
              net.parameters().begin());
  } else {
    model.best_epoch = model.history.back().epoch;
  }
  return model;
}

std::map<std::string, double> predict(const TrainedScorer &model,
                                      RecordSpan records) {
  std::map<std::string, double> out;
  for (const auto *r: records)
    out[r->complex_id] = model.predict_one(*r);
  return out;
}

namespace {
constexpr std::string_view kMagic = "OODSCORE-MODEL\n";

double nan_from_json(const nlohmann::json &j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : j.get<double>();
}

void put_u64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(std::string_view in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i])) << (8 * i);
  return v;
}
}  // namespace

std::string serialize_scorer(const TrainedScorer &model) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto &h: model.history) {
    history.push_back({
        { "epoch", h.epoch },
        { "train_loss", h.train_loss },
        { "val_pearson", h.val_pearson },
        { "val_rmse", h.val_rmse },
        { "eval_pearson", h.eval_pearson },
    });
  }
  const nlohmann::json header = {
    { "format_version", 1 },
    { "config", to_json(model.config) },
    { "input_dimension", model.input_dimension },
    { "layer_sizes", model.network.layer_sizes() },
    { "standardizer",
     { { "mean", model.standardizer.mean },
        { "scale", model.standardizer.scale } } },
    { "best_epoch", model.best_epoch },
    { "stop_metric",
     model.stop_metric == StopMetric::kPearson ? "pearson" : "rmse" },
    { "history", history },
    { "n_parameters", model.network.parameter_count() },
  };
  const std::string text = header.dump();

  std::string out(kMagic);
  put_u64(out, text.size());
  out += text;
  for (double p: model.network.parameters())
    put_u64(out, std::bit_cast<std::uint64_t>(p));
  return out;
}

TrainedScorer deserialize_scorer(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic)
    throw FormatError("not a model file (bad magic)");
  bytes.remove_prefix(kMagic.size());
  const std::uint64_t header_len = get_u64(bytes);
  bytes.remove_prefix(8);
  if (header_len > bytes.size())
    throw FormatError("model file truncated inside the header");

  TrainedScorer model;
  std::size_t n_params = 0;
  try {
    const auto header = nlohmann::json::parse(bytes.substr(0, header_len));
    if (header.at("format_version").get<int>() != 1)
      throw FormatError("unsupported model format version");
    model.config = scorer_config_from_json(header.at("config"));
    model.input_dimension = header.at("input_dimension").get<std::size_t>();
    model.standardizer.mean =
        header.at("standardizer").at("mean").get<std::vector<double>>();
    model.standardizer.scale =
        header.at("standardizer").at("scale").get<std::vector<double>>();
    model.best_epoch = header.at("best_epoch").get<int>();
    model.stop_metric = header.at("stop_metric").get<std::string>() == "rmse"
                            ? StopMetric::kRmse
                            : StopMetric::kPearson;
    for (const auto &h: header.at("history")) {
      EpochRecord rec;
      rec.epoch = h.at("epoch").get<int>();
      rec.train_loss = h.at("train_loss").get<double>();
      rec.val_pearson = nan_from_json(h.at("val_pearson"));
      rec.val_rmse = h.at("val_rmse").get<double>();
      for (const auto &[name, v]: h.at("eval_pearson").items())
        rec.eval_pearson[name] = nan_from_json(v);
      model.history.push_back(std::move(rec));
    }
    n_params = header.at("n_parameters").get<std::size_t>();
    const auto sizes = header.at("layer_sizes").get<std::vector<std::size_t>>();
    if (sizes.size() < 3 || sizes.front() != model.input_dimension
        || sizes.back() != 1)
      throw FormatError("inconsistent layer sizes");
    std::vector<std::size_t> hidden(sizes.begin() + 1, sizes.end() - 1);
    if (hidden != model.config.hidden_sizes)
      throw FormatError("layer sizes disagree with the stored config");
    model.network = Mlp(model.input_dimension, hidden, model.config.activation);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("corrupt model header: ") + e.what());
  } catch (const ValidationError &e) {
    throw FormatError(std::string("corrupt model header: ") + e.what());
  }
  if (model.standardizer.mean.size() != model.input_dimension
      || model.standardizer.scale.size() != model.input_dimension)
    throw FormatError("standardizer dimension mismatch");
  if (n_params != model.network.parameter_count())
    throw FormatError("parameter count mismatch");

  bytes.remove_prefix(header_len);
  if (bytes.size() != n_params * 8) {
    throw FormatError("model payload has " + std::to_string(bytes.size())
                      + " bytes, expected " + std::to_string(n_params * 8));
  }
  auto params = model.network.parameters();
  for (std::size_t i = 0; i < n_params; ++i) {
    params[i] = std::bit_cast<double>(get_u64(bytes.substr(8 * i, 8)));
    if (!std::isfinite(params[i]))
      throw FormatError("non-finite model parameter");
  }
  return model;
}

void save_scorer(const TrainedScorer &model, const std::filesystem::path &path) {
  const std::string bytes = serialize_scorer(model);
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs)
    throw Error("cannot write " + path.string());
  ofs.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TrainedScorer load_scorer(const std::filesystem::path &path) {
  std::ifstream ifs(path, std::ios::binary);
  if (!ifs)
    throw PrerequisiteError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << ifs.rdbuf();
  try {
    return deserialize_scorer(ss.str());
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace oodscore
