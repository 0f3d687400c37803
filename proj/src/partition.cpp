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

#include "patchasm/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace patchasm {

UnionFind::UnionFind(int n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), 0);
}

int UnionFind::find(int x) {
  ++finds_;
  int root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const int next = parent_[x];
    parent_[x] = root;
    ++rewrites_;
    x = next;
  }
  return root;
}

int UnionFind::link(int ra, int rb) {
  if (ra == rb) return ra;
  if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  ++rewrites_;
  if (rank_[ra] == rank_[rb]) ++rank_[ra];
  return ra;
}

bool MutexForest::try_merge(int a, int b) {
  const int ra = find(a);
  const int rb = find(b);
  if (ra == rb) return true;
  if (mutex(ra, rb)) return false;
  const int root = sets_.link(ra, rb);
  const int gone = root == ra ? rb : ra;
  // Re-hang the absorbed root's constraints onto the survivor.
  if (mutex_[gone].size() > mutex_[root].size()) std::swap(mutex_[gone], mutex_[root]);
  for (int m : mutex_[gone]) {
    mutex_[m].erase(gone);
    mutex_[m].insert(root);
    mutex_[root].insert(m);
  }
  // After the swap the survivor's former entries may still name `gone`.
  for (int m : mutex_[root]) {
    if (mutex_[m].erase(gone)) mutex_[m].insert(root);
  }
  mutex_[gone].clear();
  return true;
}

bool MutexForest::add_mutex(int a, int b) {
  const int ra = find(a);
  const int rb = find(b);
  if (ra == rb) return false;
  mutex_[ra].insert(rb);
  mutex_[rb].insert(ra);
  return true;
}

Partition labels_from(UnionFind& sets) {
  Partition p;
  p.label.assign(sets.size(), -1);
  std::vector<int> root_label(sets.size(), -1);
  for (int v = 0; v < sets.size(); ++v) {
    const int r = sets.find(v);
    if (root_label[r] < 0) root_label[r] = p.count++;
    p.label[v] = root_label[r];
  }
  return p;
}

Partition cc_positive(const SignedGraph& g) {
  UnionFind sets(g.nodes);
  for (const Edge& e : g.edges)
    if (e.weight > 0.0) sets.link(sets.find(e.a), sets.find(e.b));
  return labels_from(sets);
}

Partition mutex_watershed(const SignedGraph& g) {
  std::vector<std::size_t> order;
  order.reserve(g.edges.size());
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (g.edges[i].weight != 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const Edge& a = g.edges[i];
    const Edge& b = g.edges[j];
    const double ma = std::abs(a.weight), mb = std::abs(b.weight);
    if (ma != mb) return ma > mb;
    if (a.weight != b.weight) return a.weight > b.weight;
    const auto ka = std::minmax(a.a, a.b), kb = std::minmax(b.a, b.b);
    if (ka != kb) return ka < kb;
    return i < j;
  });
  MutexForest forest(g.nodes);
  for (std::size_t i : order) {
    const Edge& e = g.edges[i];
    if (e.weight > 0.0) {
      forest.try_merge(e.a, e.b);
    } else {
      forest.add_mutex(e.a, e.b);
    }
  }
  UnionFind sets = forest.sets();
  return labels_from(sets);
}

DensePartition mws_dense(const PredictionBundle& b, const PixelSet& foreground,
                         const WeightMap& weight_of) {
  DensePartition out;
  out.pixels = foreground.pixels;
  std::vector<int> node_of(b.grid.size(), -1);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) node_of[out.pixels[i]] = static_cast<int>(i);

  SignedGraph g;
  g.nodes = static_cast<int>(out.pixels.size());
  const int center = b.geometry.center_channel();
  for (Index x : out.pixels) {
    const Coord c = b.grid.coord(x);
    // Channels above the center hold offsets > 0; each pixel pair is visited
    // once from its lower endpoint and paired with the reverse direction.
    for (int ch = center + 1; ch < b.geometry.channels(); ++ch) {
      const Coord& d = b.geometry.offset(ch);
      const Coord y{c[0] + d[0], c[1] + d[1], c[2] + d[2]};
      if (!b.grid.contains(y)) continue;
      const Index ly = b.grid.linear(y);
      if (!foreground.mask[ly]) continue;
      const int reverse = b.geometry.channels() - 1 - ch;
      const double w = 0.5 * (weight_of(b.prob(x, ch)) + weight_of(b.prob(ly, reverse)));
      g.edges.push_back({node_of[x], node_of[ly], w});
    }
  }
  out.partition = mutex_watershed(g);
  return out;
}

}  // namespace patchasm
