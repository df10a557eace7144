//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_EMBEDDING_SPACE_H_
#define OODSCORE_EMBEDDING_SPACE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "oodscore/dataset.h"

namespace oodscore {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct TsneOptions {
  double perplexity = 30.0;
  int n_iterations = 1000;
  int exaggeration_iterations = 250;
  double early_exaggeration = 12.0;
  double learning_rate = 200.0;
  // Barnes-Hut is used above this many points, exact gradients below.
  std::size_t exact_limit = 1500;
  double theta = 0.5;

  void validate() const;
};

struct ProjectionResult {
  std::map<std::string, Point2> coordinates;
  double perplexity = 30.0;
  int n_components = 2;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const ProjectionResult &result);

// Two-component t-SNE of the given embeddings. Points are processed in id
// order. Throws ValidationError with fewer than 3 * perplexity points,
// mismatched dimensions or non-finite values (naming the id).
ProjectionResult project_tsne(const std::map<std::string, EmbeddingVector> &embeddings,
                              std::uint64_t seed,
                              const TsneOptions &options = {});

// Interaction embeddings of every record that has one.
std::map<std::string, EmbeddingVector> interaction_embeddings(const Dataset &dataset);

enum class Coloring { kAffinity, kMolecularWeight, kClusterHighlight };

std::string_view to_string(Coloring coloring);
Coloring parse_coloring(std::string_view text);

struct RenderedPoint {
  std::string complex_id;
  Point2 position;
  std::string color_value;  // empty when the point is drawn neutral
  std::string fill;         // "#rrggbb"
};

// Resolves per-point colors. Continuous colorings use a viridis-like map
// over the observed value range; cluster_highlight gives each listed
// cluster its own color and grays the rest. Throws ValidationError for
// projected ids missing from `dataset` or unknown highlight clusters.
std::vector<RenderedPoint> color_projection(const ProjectionResult &result,
                                            const Dataset &dataset,
                                            Coloring coloring,
                                            const std::vector<std::string> &highlight_clusters = {});

std::string projection_csv(const std::vector<RenderedPoint> &points);
std::string projection_svg(const std::vector<RenderedPoint> &points,
                           std::string_view title);

// Writes <stem>.svg and <stem>.csv into `dir`.
void render_projection(const ProjectionResult &result, const Dataset &dataset,
                       Coloring coloring,
                       const std::vector<std::string> &highlight_clusters,
                       const std::filesystem::path &dir, std::string_view stem);

}  // namespace oodscore

#endif  // OODSCORE_EMBEDDING_SPACE_H_
