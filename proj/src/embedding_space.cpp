//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oodscore/embedding_space.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>

#include "oodscore/csv.h"
#include "oodscore/errors.h"
#include "oodscore/rng.h"

namespace oodscore {

void TsneOptions::validate() const {
  if (!(perplexity > 0) || !std::isfinite(perplexity))
    throw ValidationError("t-SNE perplexity must be positive");
  if (n_iterations < 1 || exaggeration_iterations < 0
      || exaggeration_iterations > n_iterations)
    throw ValidationError("t-SNE iteration counts are inconsistent");
  if (!(learning_rate > 0) || !(early_exaggeration >= 1))
    throw ValidationError("t-SNE learning_rate must be positive and "
                          "early_exaggeration >= 1");
  if (!(theta > 0) || !(theta < 1))
    throw ValidationError("t-SNE theta must be in (0, 1)");
}

nlohmann::json to_json(const ProjectionResult &r) {
  nlohmann::json coords = nlohmann::json::object();
  for (const auto &[id, p]: r.coordinates)
    coords[id] = { p.x, p.y };
  return {
    { "parameters",
      { { "perplexity", r.perplexity },
        { "n_components", r.n_components },
        { "seed", r.seed } } },
    { "coordinates", coords },
  };
}

namespace {

using Matrix = std::vector<double>;

// Conditional probabilities p_{j|i} for row i given squared distances, with
// the Gaussian precision found by bisection so that the row entropy matches
// log(perplexity).
void calibrate_row(std::span<const double> d2, std::size_t self,
                   double perplexity, std::span<double> out) {
  const double target = std::log(perplexity);
  double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d2.size(); ++j) {
    if (j != self)
      dmin = std::min(dmin, d2[j]);
  }
  for (int iter = 0; iter < 200; ++iter) {
    double sum = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < d2.size(); ++j) {
      if (j == self) {
        out[j] = 0.0;
        continue;
      }
      // Shifted by the nearest distance for numerical range.
      const double p = std::exp(-beta * (d2[j] - dmin));
      out[j] = p;
      sum += p;
      weighted += p * (d2[j] - dmin);
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    for (auto &p: out)
      p /= sum;
    const double diff = entropy - target;
    if (std::abs(diff) < 1e-5)
      break;
    if (diff > 0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
}

struct SparseP {
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col;
  std::vector<double> val;
};

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

Matrix exact_affinities(const std::vector<std::span<const double>> &x,
                        double perplexity) {
  const std::size_t n = x.size();
  Matrix d2(n * n, 0.0), p(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j)
      d2[i * n + j] = d2[j * n + i] = squared_distance(x[i], x[j]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    calibrate_row(std::span(d2).subspan(i * n, n), i, perplexity,
                  std::span(p).subspan(i * n, n));
  }
  Matrix sym(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sym[i * n + j] = std::max((p[i * n + j] + p[j * n + i])
                                    / (2.0 * static_cast<double>(n)),
                                1e-12);
    }
  }
  return sym;
}

SparseP sparse_affinities(const std::vector<std::span<const double>> &x,
                          double perplexity) {
  const std::size_t n = x.size();
  const std::size_t k = std::min(n - 1, static_cast<std::size_t>(3.0 * perplexity));
  std::vector<std::map<std::size_t, double>> rows(n);
  std::vector<std::pair<double, std::size_t>> cand(n);
  std::vector<double> d2(k + 1), p(k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      cand[j] = { j == i ? -1.0 : squared_distance(x[i], x[j]), j };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k + 1),
                      cand.end());
    // cand[0] is i itself (distance -1).
    for (std::size_t m = 0; m <= k; ++m)
      d2[m] = m == 0 ? 0.0 : cand[m].first;
    calibrate_row(d2, 0, perplexity, p);
    for (std::size_t m = 1; m <= k; ++m) {
      rows[i][cand[m].second] += p[m];
      rows[cand[m].second][i] += p[m];
    }
  }
  SparseP out;
  out.row_start.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto &[j, v]: rows[i]) {
      out.col.push_back(j);
      out.val.push_back(v / (2.0 * static_cast<double>(n)));
    }
    out.row_start.push_back(out.col.size());
  }
  return out;
}

// Region quadtree over the current 2-D layout.
class QuadTree {
public:
  QuadTree(const Matrix &y, std::size_t n): y_(y) {
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t { 0 });
    double minx = y[0], maxx = y[0], miny = y[1], maxy = y[1];
    for (std::size_t i = 0; i < n; ++i) {
      minx = std::min(minx, y[2 * i]);
      maxx = std::max(maxx, y[2 * i]);
      miny = std::min(miny, y[2 * i + 1]);
      maxy = std::max(maxy, y[2 * i + 1]);
    }
    const double hw = 0.5 * std::max(maxx - minx, maxy - miny) + 1e-9;
    build(0, n, 0.5 * (minx + maxx), 0.5 * (miny + maxy), hw, 0);
  }

  // Accumulates the repulsive numerator for point i and the partial
  // normalization sum.
  void repulsion(std::size_t i, double theta, double &fx, double &fy,
                 double &z) const {
    visit(0, i, theta, fx, fy, z);
  }

private:
  struct Node {
    double cx, cy, hw;
    double mx = 0.0, my = 0.0;
    std::size_t begin = 0, end = 0;
    std::array<int, 4> child { -1, -1, -1, -1 };
    bool leaf = true;
  };

  int build(std::size_t begin, std::size_t end, double cx, double cy,
            double hw, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node { cx, cy, hw });
    double mx = 0.0, my = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      mx += y_[2 * order_[k]];
      my += y_[2 * order_[k] + 1];
    }
    const double cnt = static_cast<double>(end - begin);
    nodes_[id].mx = mx / cnt;
    nodes_[id].my = my / cnt;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= 1 || depth >= 48)
      return id;

    nodes_[id].leaf = false;
    auto quadrant = [&](std::size_t p) {
      return (y_[2 * p] >= cx ? 1 : 0) + (y_[2 * p + 1] >= cy ? 2 : 0);
    };
    std::array<std::size_t, 5> bounds {};
    auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
    auto last = order_.begin() + static_cast<std::ptrdiff_t>(end);
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return quadrant(a) < quadrant(b);
    });
    bounds[0] = begin;
    for (int q = 0; q < 4; ++q) {
      std::size_t k = bounds[static_cast<std::size_t>(q)];
      while (k < end && quadrant(order_[k]) == q)
        ++k;
      bounds[static_cast<std::size_t>(q) + 1] = k;
    }
    const double h = 0.5 * hw;
    for (int q = 0; q < 4; ++q) {
      const std::size_t b = bounds[static_cast<std::size_t>(q)],
                        e = bounds[static_cast<std::size_t>(q) + 1];
      if (b == e)
        continue;
      const int c = build(b, e, cx + ((q & 1) ? h : -h), cy + ((q & 2) ? h : -h),
                          h, depth + 1);
      nodes_[id].child[static_cast<std::size_t>(q)] = c;
    }
    return id;
  }

  void visit(int id, std::size_t i, double theta, double &fx, double &fy,
             double &z) const {
    const Node &node = nodes_[static_cast<std::size_t>(id)];
    const double xi = y_[2 * i], yi = y_[2 * i + 1];
    if (node.leaf) {
      for (std::size_t k = node.begin; k < node.end; ++k) {
        const std::size_t j = order_[k];
        if (j == i)
          continue;
        const double dx = xi - y_[2 * j], dy = yi - y_[2 * j + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        z += q;
        fx += q * q * dx;
        fy += q * q * dy;
      }
      return;
    }
    const double dx = xi - node.mx, dy = yi - node.my;
    const double d2 = dx * dx + dy * dy;
    if (2.0 * node.hw < theta * std::sqrt(d2)) {
      const double cnt = static_cast<double>(node.end - node.begin);
      const double q = 1.0 / (1.0 + d2);
      z += cnt * q;
      fx += cnt * q * q * dx;
      fy += cnt * q * q * dy;
      return;
    }
    for (int c: node.child) {
      if (c >= 0)
        visit(c, i, theta, fx, fy, z);
    }
  }

  const Matrix &y_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

void exact_gradient(const Matrix &p, const Matrix &y, std::size_t n,
                    double exaggeration, Matrix &grad) {
  Matrix num(n * n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy);
      num[i * n + j] = num[j * n + i] = q;
      z += 2.0 * q;
    }
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const double q = num[i * n + j];
      const double m = 4.0 * (exaggeration * p[i * n + j] - q / z) * q;
      grad[2 * i] += m * (y[2 * i] - y[2 * j]);
      grad[2 * i + 1] += m * (y[2 * i + 1] - y[2 * j + 1]);
    }
  }
}

void barnes_hut_gradient(const SparseP &p, const Matrix &y, std::size_t n,
                         double exaggeration, double theta, Matrix &grad) {
  QuadTree tree(y, n);
  Matrix rep(2 * n, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    tree.repulsion(i, theta, rep[2 * i], rep[2 * i + 1], z);
  for (std::size_t i = 0; i < n; ++i) {
    double ax = 0.0, ay = 0.0;
    for (std::size_t k = p.row_start[i]; k < p.row_start[i + 1]; ++k) {
      const std::size_t j = p.col[k];
      const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
      const double q = 1.0 / (1.0 + dx * dx + dy * dy);
      ax += p.val[k] * q * dx;
      ay += p.val[k] * q * dy;
    }
    grad[2 * i] = 4.0 * (exaggeration * ax - rep[2 * i] / z);
    grad[2 * i + 1] = 4.0 * (exaggeration * ay - rep[2 * i + 1] / z);
  }
}

}  // namespace

ProjectionResult project_tsne(const std::map<std::string, EmbeddingVector> &embeddings,
                              std::uint64_t seed, const TsneOptions &options) {
  options.validate();
  const std::size_t n = embeddings.size();
  if (static_cast<double>(n) < 3.0 * options.perplexity) {
    throw ValidationError("t-SNE with perplexity " + format_double(options.perplexity)
                          + " needs at least " + format_double(3.0 * options.perplexity)
                          + " points, got " + std::to_string(n));
  }
  std::vector<std::span<const double>> x;
  std::vector<std::string> ids;
  const std::size_t dim = embeddings.begin()->second.dimension();
  for (const auto &[id, e]: embeddings) {
    if (e.dimension() != dim)
      throw ValidationError("embedding of " + id + " has dimension "
                            + std::to_string(e.dimension()) + ", expected "
                            + std::to_string(dim));
    for (double v: e.values()) {
      if (!std::isfinite(v))
        throw ValidationError("embedding of " + id + " has a non-finite value");
    }
    ids.push_back(id);
    x.push_back(e.values());
  }

  const bool exact = n <= options.exact_limit;
  Matrix p_dense;
  SparseP p_sparse;
  if (exact)
    p_dense = exact_affinities(x, options.perplexity);
  else
    p_sparse = sparse_affinities(x, options.perplexity);

  Rng rng(derive_seed(seed, "tsne"));
  std::normal_distribution<double> init(0.0, 1e-4);
  Matrix y(2 * n), update(2 * n, 0.0), gains(2 * n, 1.0), grad(2 * n, 0.0);
  for (auto &v: y)
    v = init(rng);

  for (int iter = 0; iter < options.n_iterations; ++iter) {
    const bool early = iter < options.exaggeration_iterations;
    const double exaggeration = early ? options.early_exaggeration : 1.0;
    const double momentum = early ? 0.5 : 0.8;
    if (exact)
      exact_gradient(p_dense, y, n, exaggeration, grad);
    else
      barnes_hut_gradient(p_sparse, y, n, exaggeration, options.theta, grad);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const bool same_sign = (grad[k] > 0) == (update[k] > 0);
      gains[k] = same_sign ? std::max(gains[k] * 0.8, 0.01) : gains[k] + 0.2;
      update[k] = momentum * update[k] - options.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  }

  ProjectionResult result;
  result.perplexity = options.perplexity;
  result.n_components = 2;
  result.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y[2 * i]) || !std::isfinite(y[2 * i + 1]))
      throw Error("t-SNE diverged for " + ids[i]);
    result.coordinates[ids[i]] = { y[2 * i], y[2 * i + 1] };
  }
  return result;
}

std::map<std::string, EmbeddingVector> interaction_embeddings(const Dataset &dataset) {
  std::map<std::string, EmbeddingVector> out;
  for (const auto &r: dataset.records()) {
    if (r.interaction_embedding)
      out.emplace(r.complex_id, *r.interaction_embedding);
  }
  return out;
}

std::string_view to_string(Coloring coloring) {
  switch (coloring) {
  case Coloring::kAffinity:
    return "affinity";
  case Coloring::kMolecularWeight:
    return "molecular_weight";
  case Coloring::kClusterHighlight:
    return "cluster_highlight";
  }
  return "?";
}

Coloring parse_coloring(std::string_view text) {
  if (text == "affinity")
    return Coloring::kAffinity;
  if (text == "molecular_weight")
    return Coloring::kMolecularWeight;
  if (text == "cluster_highlight")
    return Coloring::kClusterHighlight;
  throw ValidationError("unknown coloring '" + std::string(text) + "'");
}

namespace {
constexpr const char *kNeutral = "#c8c8c8";
constexpr const char *kSingle = "#3b6ea8";

std::string hex_color(double r, double g, double b) {
  auto byte = [](double v) {
    return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", byte(r), byte(g), byte(b));
  return buf;
}

// Piecewise-linear viridis approximation.
std::string viridis(double t) {
  static constexpr std::array<std::array<double, 3>, 9> stops { {
      { 0.267, 0.005, 0.329 },
      { 0.279, 0.175, 0.483 },
      { 0.230, 0.322, 0.546 },
      { 0.173, 0.449, 0.558 },
      { 0.128, 0.567, 0.551 },
      { 0.153, 0.681, 0.507 },
      { 0.364, 0.786, 0.388 },
      { 0.678, 0.864, 0.190 },
      { 0.993, 0.906, 0.144 },
  } };
  t = std::clamp(t, 0.0, 1.0) * static_cast<double>(stops.size() - 1);
  const auto k = std::min(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(k);
  const auto &a = stops[k], &b = stops[k + 1];
  return hex_color(a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]),
                   a[2] + f * (b[2] - a[2]));
}

constexpr std::array<const char *, 8> kCategorical {
  "#1b9e77", "#d95f02", "#7570b3", "#e7298a",
  "#66a61e", "#e6ab02", "#a6761d", "#1f78b4",
};
}  // namespace

std::vector<RenderedPoint> color_projection(const ProjectionResult &result,
                                            const Dataset &dataset,
                                            Coloring coloring,
                                            const std::vector<std::string> &highlight_clusters) {
  std::map<std::string, std::size_t> highlight_index;
  if (coloring == Coloring::kClusterHighlight) {
    const auto clusters = dataset.clusters();
    for (const auto &c: highlight_clusters) {
      if (!clusters.contains(c))
        throw ValidationError("unknown highlight cluster '" + c + "'");
      highlight_index.emplace(c, highlight_index.size());
    }
  }

  std::vector<RenderedPoint> points;
  std::vector<std::optional<double>> values;
  for (const auto &[id, pos]: result.coordinates) {
    const ComplexRecord &r = dataset.at(id);
    RenderedPoint p { id, pos, {}, kNeutral };
    std::optional<double> value;
    switch (coloring) {
    case Coloring::kAffinity:
      value = r.label.pk_value;
      break;
    case Coloring::kMolecularWeight:
      value = r.molecular_weight;
      break;
    case Coloring::kClusterHighlight:
      if (highlight_clusters.empty()) {
        p.fill = kSingle;
      } else if (auto it = highlight_index.find(r.cluster_id);
                 it != highlight_index.end()) {
        p.color_value = r.cluster_id;
        p.fill = kCategorical[it->second % kCategorical.size()];
      }
      break;
    }
    if (value)
      p.color_value = format_double(*value);
    values.push_back(value);
    points.push_back(std::move(p));
  }

  if (coloring != Coloring::kClusterHighlight) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto &v: values) {
      if (v) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (values[i])
        points[i].fill = viridis(hi > lo ? (*values[i] - lo) / (hi - lo) : 0.5);
    }
  }
  return points;
}

std::string projection_csv(const std::vector<RenderedPoint> &points) {
  std::ostringstream os;
  os << "complex_id,x,y,color_value\n";
  for (const auto &p: points) {
    os << csv_escape(p.complex_id) << ',' << format_double(p.position.x) << ','
       << format_double(p.position.y) << ',' << csv_escape(p.color_value)
       << '\n';
  }
  return os.str();
}

std::string projection_svg(const std::vector<RenderedPoint> &points,
                           std::string_view title) {
  constexpr double kSize = 600.0, kMargin = 30.0;
  double minx = 0, maxx = 1, miny = 0, maxy = 1;
  if (!points.empty()) {
    minx = maxx = points[0].position.x;
    miny = maxy = points[0].position.y;
    for (const auto &p: points) {
      minx = std::min(minx, p.position.x);
      maxx = std::max(maxx, p.position.x);
      miny = std::min(miny, p.position.y);
      maxy = std::max(maxy, p.position.y);
    }
  }
  const double span = std::max({ maxx - minx, maxy - miny, 1e-12 });
  const double scale = (kSize - 2 * kMargin) / span;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
     << "\" height=\"" << kSize << "\" viewBox=\"0 0 " << kSize << ' ' << kSize
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" "
        "font-size=\"14\">"
     << title << "</text>\n";
  // Neutral points first so colored ones stay visible.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto &p: points) {
      const bool neutral = p.fill == kNeutral;
      if (neutral != (pass == 0))
        continue;
      const double cx = kMargin + (p.position.x - minx) * scale;
      const double cy = kSize - kMargin - (p.position.y - miny) * scale;
      os << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy)
         << "\" r=\"2.5\" fill=\"" << p.fill << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void render_projection(const ProjectionResult &result, const Dataset &dataset,
                       Coloring coloring,
                       const std::vector<std::string> &highlight_clusters,
                       const std::filesystem::path &dir, std::string_view stem) {
  const auto points = color_projection(result, dataset, coloring,
                                       highlight_clusters);
  std::filesystem::create_directories(dir);
  const std::string base(stem);
  std::ofstream svg(dir / (base + ".svg"), std::ios::binary);
  std::ofstream csv(dir / (base + ".csv"), std::ios::binary);
  if (!svg || !csv)
    throw Error("cannot write projection files under " + dir.string());
  svg << projection_svg(points, "t-SNE (" + std::string(to_string(coloring)) + ")");
  csv << projection_csv(points);
}

}  // namespace oodscore
