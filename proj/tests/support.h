//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_TESTS_SUPPORT_H_
#define OODSCORE_TESTS_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "oodscore/dataset.h"
#include "oodscore/metrics.h"
#include "oodscore/mlp.h"

namespace oodscore::test {

inline ComplexRecord make_record(std::string id, std::string cluster, double pk,
                                 std::vector<double> interaction = {},
                                 std::vector<double> ligand = {}) {
  ComplexRecord r;
  r.complex_id = std::move(id);
  r.cluster_id = std::move(cluster);
  r.label.pk_value = pk;
  if (!interaction.empty())
    r.interaction_embedding = EmbeddingVector(std::move(interaction));
  if (!ligand.empty())
    r.ligand_embedding = EmbeddingVector(std::move(ligand));
  return r;
}

inline std::string numbered(const std::string &prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05d", i);
  return prefix + buf;
}

// Dataset with the given cluster sizes ("K0", "K1", ...), labels uniform in
// [3, 11] and no embeddings.
inline Dataset clustered_dataset(const std::vector<int> &sizes,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pk(3.0, 11.0);
  std::vector<ComplexRecord> records;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    for (int i = 0; i < sizes[c]; ++i) {
      records.push_back(make_record(numbered("k" + std::to_string(c) + "_", i),
                                    "K" + std::to_string(c), pk(rng)));
    }
  }
  return Dataset(std::move(records));
}

class TempDir {
public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path()
            / ("oodscore-test-" + std::to_string(::getpid()) + "-"
               + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const {
    return path_ / name;
  }

private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path &path,
                       const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
}

inline std::string read_text(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  return { std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>() };
}

// --- brute-force reference metrics ----------------------------------------

// Mean product of z-scores, in long double.
inline double oracle_pearson(const std::vector<double> &x,
                             const std::vector<double> &y) {
  const auto n = static_cast<long double>(x.size());
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  const long double sx = std::sqrt(vx / n), sy = std::sqrt(vy / n);
  long double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc += ((x[i] - mx) / sx) * ((y[i] - my) / sy);
  return static_cast<double>(acc / n);
}

inline double oracle_rmse(const std::vector<double> &x,
                          const std::vector<double> &y) {
  long double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    s += (static_cast<long double>(x[i]) - y[i]) * (static_cast<long double>(x[i]) - y[i]);
  return static_cast<double>(std::sqrt(s / x.size()));
}

// Number of entries ranked strictly ahead of `e`: higher score, or equal
// score and smaller id.
inline std::size_t rank_of(const DecoySet &set, const DecoyEntry &e) {
  std::size_t ahead = 0;
  for (const auto &o: set.entries) {
    if (*o.score > *e.score || (*o.score == *e.score && o.entry_id < e.entry_id))
      ++ahead;
  }
  return ahead;
}

inline double oracle_docking(const std::vector<DecoySet> &sets, double cutoff,
                             int top_n) {
  int ok = 0;
  for (const auto &s: sets) {
    bool hit = false;
    for (const auto &e: s.entries) {
      const double rmsd = e.rmsd_to_native ? *e.rmsd_to_native : 0.0;
      if (rank_of(s, e) < static_cast<std::size_t>(top_n) && rmsd <= cutoff)
        hit = true;
    }
    ok += hit;
  }
  return static_cast<double>(ok) / static_cast<double>(sets.size());
}

// Fraction given exactly as num / den so the top count is an integer
// ceiling.
inline double oracle_ef(const DecoySet &s, long long num, long long den) {
  const long long n = static_cast<long long>(s.entries.size());
  long long top = (num * n + den - 1) / den;
  top = std::clamp<long long>(top, 1, n);
  long long actives = 0, top_actives = 0;
  for (const auto &e: s.entries) {
    if (e.kind != DecoyKind::kActive)
      continue;
    ++actives;
    if (static_cast<long long>(rank_of(s, e)) < top)
      ++top_actives;
  }
  return (static_cast<double>(top_actives) / static_cast<double>(top))
         / (static_cast<double>(actives) / static_cast<double>(n));
}

// Small random decoy set with coarse scores (so ties occur) and ids in
// shuffled order. Screening sets contain at least one active.
inline DecoySet random_decoy_set(std::mt19937_64 &rng, bool screening,
                                 int max_entries = 20) {
  std::uniform_int_distribution<int> size(1, max_entries);
  std::uniform_int_distribution<int> score(0, 6);
  std::uniform_real_distribution<double> rmsd(0.0, 5.0);
  std::bernoulli_distribution coin(0.3);
  DecoySet s;
  s.target_id = "T";
  const int n = size(rng);
  for (int i = 0; i < n; ++i) {
    DecoyEntry e;
    e.entry_id = numbered("e", i);
    e.score = 0.5 * score(rng);
    if (screening) {
      e.kind = coin(rng) ? DecoyKind::kActive : DecoyKind::kInactive;
    } else {
      e.kind = i == 0 ? DecoyKind::kNativePose : DecoyKind::kDecoyPose;
      if (i != 0 || coin(rng))
        e.rmsd_to_native = rmsd(rng);
    }
    s.entries.push_back(e);
  }
  if (screening)
    s.entries[std::uniform_int_distribution<int>(0, n - 1)(rng)].kind = DecoyKind::kActive;
  std::shuffle(s.entries.begin(), s.entries.end(), rng);
  return s;
}

// Two Gaussian blobs (unit within-blob std) whose centers lie `separation`
// apart along a random direction. Ids "a..." / "b...".
inline std::map<std::string, EmbeddingVector>
two_blobs(std::uint64_t seed, int per_blob, std::size_t dim = 32,
          double separation = 20.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> dir(dim);
  double norm = 0;
  for (auto &v: dir) {
    v = n(rng);
    norm += v * v;
  }
  for (auto &v: dir)
    v *= separation / std::sqrt(norm);
  std::map<std::string, EmbeddingVector> out;
  for (int b = 0; b < 2; ++b) {
    for (int i = 0; i < per_blob; ++i) {
      std::vector<double> e(dim);
      for (std::size_t j = 0; j < dim; ++j)
        e[j] = n(rng) + (b == 1 ? dir[j] : 0.0);
      out.emplace(numbered(b == 0 ? "a" : "b", i), EmbeddingVector(std::move(e)));
    }
  }
  return out;
}

// Mean pairwise distance within blobs (ids sharing the first character)
// versus between them.
template <class PointMap>
std::pair<double, double> blob_distances(const PointMap &coords) {
  long double within = 0, between = 0;
  long long nw = 0, nb = 0;
  for (auto i = coords.begin(); i != coords.end(); ++i) {
    for (auto j = std::next(i); j != coords.end(); ++j) {
      const double d = std::hypot(i->second.x - j->second.x, i->second.y - j->second.y);
      if (i->first[0] == j->first[0]) {
        within += d;
        ++nw;
      } else {
        between += d;
        ++nb;
      }
    }
  }
  return { static_cast<double>(within / nw), static_cast<double>(between / nb) };
}

inline FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureMatrix x { rows, cols, std::vector<double>(rows * cols) };
  for (auto &v: x.data)
    v = n(rng);
  return x;
}

// Central differences of the batch loss, parameter by parameter.
inline std::vector<double> numeric_gradient(Mlp &net, const FeatureMatrix &x,
                                            const std::vector<double> &y,
                                            const std::vector<std::size_t> &batch) {
  constexpr double h = 1e-6;
  std::vector<double> g(net.parameter_count());
  auto p = net.parameters();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = net.loss(x, y, batch);
    p[i] = keep - h;
    const double down = net.loss(x, y, batch);
    p[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

}  // namespace oodscore::test

#endif  // OODSCORE_TESTS_SUPPORT_H_
