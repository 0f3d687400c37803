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

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "patchasm/partition.hpp"
#include "patchasm/patch_graph.hpp"
#include "support.hpp"

namespace patchasm {
namespace {

SignedGraph graph(int n, std::vector<Edge> edges) { return {n, std::move(edges)}; }

bool same(const Partition& p, int a, int b) { return p.label[a] == p.label[b]; }

TEST(CcPositive, Examples) {
  const auto p = cc_positive(graph(3, {{0, 1, 0.9}, {1, 2, -0.8}}));
  EXPECT_EQ(p.label, std::vector<int>({0, 0, 1}));
  EXPECT_EQ(cc_positive(graph(3, {})).count, 3);
  EXPECT_EQ(cc_positive(graph(3, {{0, 1, 1.0}, {1, 2, 1.0}})).count, 1);
  EXPECT_EQ(cc_positive(graph(2, {{0, 1, 0.0}})).count, 2);
}

TEST(MutexWatershed, HandTrace) {
  const auto p = mutex_watershed(graph(3, {{0, 1, 0.9}, {1, 2, -0.8}, {0, 2, 0.5}}));
  EXPECT_EQ(p.label, std::vector<int>({0, 0, 1}));
}

TEST(MutexWatershed, AllNegativeSingletons) {
  EXPECT_EQ(mutex_watershed(graph(4, {{0, 1, -1}, {1, 2, -0.3}, {2, 3, -0.2}})).count, 4);
}

TEST(MutexWatershed, TieBreakPrefersPositive) {
  // |w| ties: the positive edge is processed first and merges 0 and 1 before
  // the equal-magnitude repulsion can separate them.
  const auto p = mutex_watershed(graph(2, {{0, 1, -0.5}, {0, 1, 0.5}}));
  EXPECT_EQ(p.count, 1);
}

TEST(MutexWatershed, ZeroWeightsIgnored) {
  EXPECT_EQ(mutex_watershed(graph(3, {{0, 1, 0.0}, {1, 2, 0.0}})).count, 3);
}

TEST(Partition, LabelsByFirstOccurrence) {
  const auto p = cc_positive(graph(5, {{3, 4, 1.0}, {0, 2, 1.0}}));
  EXPECT_EQ(p.label, std::vector<int>({0, 1, 0, 2, 2}));
  EXPECT_EQ(p.count, 3);
}

SignedGraph random_graph(Rng& rng, bool positive_only) {
  const int n = static_cast<int>(rng.integer(1, 12));
  SignedGraph g{n, {}};
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (rng.uniform() > 0.4) continue;
      double w = std::round(rng.uniform(-1.0, 1.0) * 8.0) / 8.0;  // coarse grid forces ties
      if (positive_only) w = std::abs(w) + 0.125;
      g.edges.push_back({a, b, w});
    }
  return g;
}

// Reference mutex watershed: same schedule, constraints checked by scanning
// every enacted mutex edge between the two current clusters. Enacted
// constraints are reported through `enacted`.
Partition reference_mws(const SignedGraph& g, std::vector<std::pair<int, int>>* enacted = nullptr) {
  std::vector<Edge> order = g.edges;
  std::sort(order.begin(), order.end(), [](const Edge& x, const Edge& y) {
    if (std::abs(x.weight) != std::abs(y.weight)) return std::abs(x.weight) > std::abs(y.weight);
    if (x.weight != y.weight) return x.weight > y.weight;
    return std::minmax(x.a, x.b) < std::minmax(y.a, y.b);
  });
  std::vector<int> cluster(g.nodes);
  std::iota(cluster.begin(), cluster.end(), 0);
  std::vector<std::pair<int, int>> mutexes;
  auto constrained = [&](int ca, int cb) {
    for (auto [u, v] : mutexes)
      if ((cluster[u] == ca && cluster[v] == cb) || (cluster[u] == cb && cluster[v] == ca)) return true;
    return false;
  };
  for (const Edge& e : order) {
    const int ca = cluster[e.a], cb = cluster[e.b];
    if (e.weight > 0 && ca != cb && !constrained(ca, cb)) {
      for (int& c : cluster)
        if (c == cb) c = ca;
    } else if (e.weight < 0 && ca != cb) {
      mutexes.emplace_back(e.a, e.b);
    }
  }
  if (enacted) *enacted = mutexes;
  Partition p;
  std::map<int, int> ids;
  for (int c : cluster) {
    auto [it, fresh] = ids.emplace(c, static_cast<int>(ids.size()));
    p.label.push_back(it->second);
  }
  p.count = static_cast<int>(ids.size());
  return p;
}

TEST(MutexWatershed, RandomGraphProperties) {
  Rng rng(1000, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const SignedGraph g = random_graph(rng, false);
    const Partition p = mutex_watershed(g);
    ASSERT_EQ(static_cast<int>(p.label.size()), g.nodes);
    std::vector<std::pair<int, int>> enacted;
    EXPECT_EQ(p, reference_mws(g, &enacted));
    EXPECT_EQ(p, mutex_watershed(g));
    for (auto [u, v] : enacted) { EXPECT_FALSE(same(p, u, v)); }
    const Partition cc = cc_positive(g);
    for (int a = 0; a < g.nodes; ++a)
      for (int b = 0; b < g.nodes; ++b)
        if (same(p, a, b)) { EXPECT_TRUE(same(cc, a, b)); }
  }
}

TEST(MutexWatershed, EqualsCcOnPositiveGraphs) {
  Rng rng(1001, 8);
  for (int trial = 0; trial < 500; ++trial) {
    const SignedGraph g = random_graph(rng, true);
    EXPECT_EQ(mutex_watershed(g), cc_positive(g));
  }
}

TEST(UnionFind, OperationCountBound) {
  Rng rng(5, 5);
  for (int n : {10, 1000, 100000}) {
    UnionFind uf(n);
    const int ops = 3 * n;
    for (int k = 0; k < ops; ++k) {
      const int a = static_cast<int>(rng.integer(0, n - 1)), b = static_cast<int>(rng.integer(0, n - 1));
      const int ra = uf.find(a), rb = uf.find(b);
      if (ra != rb) uf.link(ra, rb);
    }
    EXPECT_LE(uf.rewrites(), 3 * uf.finds() + static_cast<std::uint64_t>(n));
  }
}

TEST(UnionFind, ChainCompresses) {
  const int n = 1 << 12;
  UnionFind uf(n);
  for (int i = 1; i < n; ++i) uf.link(uf.find(i - 1), uf.find(i));
  const auto before = uf.rewrites();
  for (int i = 0; i < n; ++i) uf.find(i);
  for (int i = 0; i < n; ++i) uf.find(i);
  EXPECT_LE(uf.rewrites() - before, static_cast<std::uint64_t>(n));
}

TEST(MutexForest, ConstraintsFollowRoots) {
  MutexForest f(4);
  EXPECT_TRUE(f.add_mutex(0, 1));
  EXPECT_TRUE(f.try_merge(1, 2));
  EXPECT_FALSE(f.try_merge(0, 2));
  EXPECT_TRUE(f.mutex(f.find(0), f.find(2)));
  EXPECT_TRUE(f.mutex(f.find(2), f.find(0)));
  EXPECT_TRUE(f.try_merge(0, 3));
  EXPECT_FALSE(f.try_merge(3, 1));
  EXPECT_FALSE(f.add_mutex(0, 3));
}

TEST(MwsDense, PerfectPredictionsRecoverInstances) {
  ShapeParams params;
  params.shape = {40, 40};
  const GroundTruth gt = make_shapes(ShapeKind::Blobs, params, 12);
  const auto b = synth(gt, PatchGeometry({5, 5}));
  const PixelSet fg = image_foreground(b);
  const DensePartition d = mws_dense(b, fg);
  ASSERT_EQ(d.pixels, fg.pixels);
  std::vector<int> owner(gt.grid.size(), -1);
  for (std::size_t i = 0; i < gt.masks.size(); ++i)
    for (Index q = 0; q < gt.grid.size(); ++q)
      if (gt.masks[i][q]) owner[q] = static_cast<int>(i);
  for (std::size_t i = 0; i < d.pixels.size(); ++i)
    for (std::size_t j = 0; j < d.pixels.size(); ++j)
      EXPECT_EQ(same(d.partition, static_cast<int>(i), static_cast<int>(j)),
                owner[d.pixels[i]] == owner[d.pixels[j]]);
}

TEST(MwsDense, UniformHalfGivesSingletons) {
  const PatchGeometry g({3, 3});
  const auto b = make_bundle(g, Tensor<float>({9, 4, 4}, 0.5f), Tensor<float>({4, 4}, 1.0f), std::nullopt);
  const DensePartition d = mws_dense(b, image_foreground(b));
  EXPECT_EQ(d.partition.count, 16);
}

TEST(MwsDense, SingleForegroundPixel) {
  const PatchGeometry g({3, 3});
  std::vector<float> fp(16, 0.0f);
  fp[5] = 1.0f;
  const auto b = make_bundle(g, Tensor<float>({9, 4, 4}, 1.0f), Tensor<float>({4, 4}, fp), std::nullopt);
  const DensePartition d = mws_dense(b, image_foreground(b));
  EXPECT_EQ(d.pixels, std::vector<Index>({5}));
  EXPECT_EQ(d.partition.count, 1);
}

TEST(MwsDense, AveragesBothDirections) {
  // Two pixels: p(0, +1) = 0.9 and p(1, -1) = 0.2 average to s = 0.1 > 0.
  const PatchGeometry g({1, 3});
  const auto b = make_bundle(g, Tensor<float>({3, 1, 2}, std::vector<float>{0, 0.2f, 1, 1, 0.9f, 0}),
                             Tensor<float>({1, 2}, 1.0f), std::nullopt);
  EXPECT_EQ(mws_dense(b, image_foreground(b)).partition.count, 1);
  const auto c = make_bundle(g, Tensor<float>({3, 1, 2}, std::vector<float>{0, 0.0f, 1, 1, 0.9f, 0}),
                             Tensor<float>({1, 2}, 1.0f), std::nullopt);
  EXPECT_EQ(mws_dense(c, image_foreground(c)).partition.count, 2);
  // A custom weight map that is always attractive merges regardless.
  EXPECT_EQ(mws_dense(c, image_foreground(c), [](double) { return 1.0; }).partition.count, 1);
}

TEST(Partition, AcceptsEdgeListText) {
  SignedGraph g{4, {{0, 1, 0.9}, {1, 2, -0.8}, {0, 2, 0.5}, {2, 3, 0.25}}};
  std::stringstream ss;
  write_edge_list(ss, g);
  const SignedGraph back = read_edge_list(ss);
  EXPECT_EQ(mutex_watershed(back), mutex_watershed(g));
  EXPECT_EQ(cc_positive(back), cc_positive(g));
}

}  // namespace
}  // namespace patchasm
