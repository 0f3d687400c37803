// Copyright 2026 The patchasm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <unordered_set>
#include <vector>

#include "patchasm/core.hpp"

namespace patchasm {

struct Edge {
  int a = 0;
  int b = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Undirected simple graph with signed edge weights.
struct SignedGraph {
  int nodes = 0;
  std::vector<Edge> edges;
};

/// Dense labeling: label[node] in [0, count), numbered by first occurrence.
struct Partition {
  std::vector<int> label;
  int count = 0;

  bool operator==(const Partition&) const = default;
};

/// Union-find with path compression and union by rank. Counts finds and
/// parent-pointer rewrites so the amortized cost can be checked.
class UnionFind {
 public:
  explicit UnionFind(int n);

  int find(int x);
  /// Links two roots; returns the surviving root.
  int link(int ra, int rb);
  int size() const { return static_cast<int>(parent_.size()); }

  std::uint64_t finds() const { return finds_; }
  std::uint64_t rewrites() const { return rewrites_; }

 private:
  std::vector<int> parent_;
  std::vector<std::uint8_t> rank_;
  std::uint64_t finds_ = 0;
  std::uint64_t rewrites_ = 0;
};

/// Union-find plus, per root, the set of roots it may never merge with.
class MutexForest {
 public:
  explicit MutexForest(int n) : sets_(n), mutex_(n) {}

  int find(int x) { return sets_.find(x); }
  bool mutex(int ra, int rb) const { return mutex_[ra].contains(rb); }
  /// Merges the sets of a and b unless they are mutex-constrained. Returns
  /// whether they share a root afterwards.
  bool try_merge(int a, int b);
  /// Constrains the sets of a and b unless already merged. Returns whether a
  /// constraint now separates them.
  bool add_mutex(int a, int b);

  const UnionFind& sets() const { return sets_; }

 private:
  UnionFind sets_;
  std::vector<std::unordered_set<int>> mutex_;
};

Partition labels_from(UnionFind& sets);

/// Connected components over edges with weight > 0.
Partition cc_positive(const SignedGraph& graph);

/// Mutex watershed: edges by descending |w| (ties: higher w, then endpoint
/// pair); positive edges merge unless constrained, negative edges add
/// constraints unless merged. Zero-weight edges are skipped.
Partition mutex_watershed(const SignedGraph& graph);

/// Pixel-level baseline: mutex watershed over foreground pixels with weights
/// weight_of(p), default 2p - 1, averaged over both directions of each pair.
struct DensePartition {
  std::vector<Index> pixels;  // node -> pixel
  Partition partition;
};

using WeightMap = std::function<double(double)>;

inline double signed_weight(double p) { return 2.0 * p - 1.0; }

DensePartition mws_dense(const PredictionBundle& bundle, const PixelSet& foreground,
                         const WeightMap& weight_of = signed_weight);

}  // namespace patchasm
