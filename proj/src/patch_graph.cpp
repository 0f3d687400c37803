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

#include "patchasm/patch_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "patchasm/parallel.hpp"

namespace patchasm {

namespace {

struct Footprint {
  std::vector<Index> pixels;
  std::vector<Coord> coords;
  std::vector<Index> keys;
  std::vector<Index> slots;
};

Footprint footprint_of(const PatchForeground& fg_of, const ConsensusField& field, Index x) {
  const Coord& stride = field.geometry().pair_stride();
  Footprint f;
  fg_of.collect(x, f.pixels);
  f.coords.reserve(f.pixels.size());
  for (Index p : f.pixels) {
    const Coord c = field.grid().coord(p);
    f.coords.push_back(c);
    f.keys.push_back(c[0] * stride[0] + c[1] * stride[1] + c[2] * stride[2]);
    f.slots.push_back(field.slot(p));
  }
  return f;
}

// Callers pass the footprint of the lower-indexed patch first so the
// summation order, and hence the result, is independent of argument order.
std::optional<double> pair_affinity(const ConsensusField& field, const Footprint& fa,
                                    const Footprint& fb) {
  const PatchGeometry& g = field.geometry();
  const Coord reach{2 * g.radius()[0], 2 * g.radius()[1], 2 * g.radius()[2]};
  double sum = 0.0;
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < fa.pixels.size(); ++i) {
    const Coord& cv = fa.coords[i];
    for (std::size_t j = 0; j < fb.pixels.size(); ++j) {
      const Coord& cw = fb.coords[j];
      const Coord d{cw[0] - cv[0], cw[1] - cv[1], cw[2] - cv[2]};
      if (std::abs(d[0]) > reach[0] || std::abs(d[1]) > reach[1] || std::abs(d[2]) > reach[2])
        continue;
      const Index key = fb.keys[j] - fa.keys[i];
      const int plane = static_cast<int>(key >= 0 ? key : -key);
      const Index s = key >= 0 ? fa.slots[i] : fb.slots[j];
      if (s < 0) continue;
      const auto a = field.entry(s, plane);
      if (!a) continue;
      sum += *a;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::optional<double> ordered_affinity(const ConsensusField& field, const Footprint& fa, Index a,
                                       const Footprint& fb, Index b) {
  return a <= b ? pair_affinity(field, fa, fb) : pair_affinity(field, fb, fa);
}

std::vector<Footprint> node_footprints(const PatchForeground& fg_of, const ConsensusField& field,
                                       const std::vector<Index>& nodes, int threads) {
  std::vector<Footprint> out(nodes.size());
  parallel_for(static_cast<Index>(nodes.size()), threads, [&](Index begin, Index end, int) {
    for (Index i = begin; i < end; ++i) out[i] = footprint_of(fg_of, field, nodes[i]);
  });
  return out;
}

PatchGraph evaluate_pairs(const ConsensusField& field, std::vector<Index> nodes,
                          const std::vector<Footprint>& fps,
                          const std::vector<std::pair<int, int>>& pairs, int threads) {
  std::vector<std::optional<double>> weights(pairs.size());
  parallel_for(static_cast<Index>(pairs.size()), threads, [&](Index begin, Index end, int) {
    for (Index k = begin; k < end; ++k) {
      const auto [i, j] = pairs[k];
      weights[k] = ordered_affinity(field, fps[i], nodes[i], fps[j], nodes[j]);
    }
  });
  PatchGraph pg;
  pg.graph.nodes = static_cast<int>(nodes.size());
  pg.nodes = std::move(nodes);
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (weights[k]) pg.graph.edges.push_back({pairs[k].first, pairs[k].second, *weights[k]});
  return pg;
}

std::vector<Index> selected_pixels(const PatchSelection& sel) {
  std::vector<Index> nodes;
  nodes.reserve(sel.patches.size());
  for (const auto& p : sel.patches) nodes.push_back(p.pixel);
  return nodes;
}

}  // namespace

std::vector<std::vector<int>> PatchGraph::adjacency() const {
  std::vector<std::vector<int>> adj(graph.nodes);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    adj[graph.edges[e].a].push_back(static_cast<int>(e));
    adj[graph.edges[e].b].push_back(static_cast<int>(e));
  }
  return adj;
}

std::optional<double> paff(const ConsensusField& field, const PatchForeground& fg_of, Index a,
                           Index b) {
  const Footprint fa = footprint_of(fg_of, field, a);
  const Footprint fb = footprint_of(fg_of, field, b);
  return ordered_affinity(field, fa, a, fb, b);
}

PatchGraph build_graph(const ConsensusField& field, const PatchForeground& fg_of,
                       const PatchSelection& selection, int threads) {
  const Grid& grid = field.grid();
  const PatchGeometry& g = field.geometry();
  std::vector<Index> nodes = selected_pixels(selection);
  const auto fps = node_footprints(fg_of, field, nodes, threads);

  // Foregrounds lie within one radius of their centers and affinities reach two
  // radii, so centers farther apart than four radii on any axis share nothing.
  Coord cell{}, reach{}, span{};
  for (int a = 0; a < 3; ++a) {
    cell[a] = 2 * g.radius()[a] + 1;
    reach[a] = 4 * g.radius()[a];
    span[a] = (reach[a] + cell[a] - 1) / cell[a];
  }
  std::vector<Coord> centers(nodes.size());
  std::map<Coord, std::vector<int>> cells;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    centers[i] = grid.coord(nodes[i]);
    const Coord& c = centers[i];
    cells[{c[0] / cell[0], c[1] / cell[1], c[2] / cell[2]}].push_back(static_cast<int>(i));
  }

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Coord& c = centers[i];
    const Coord home{c[0] / cell[0], c[1] / cell[1], c[2] / cell[2]};
    for (Index u = home[0] - span[0]; u <= home[0] + span[0]; ++u)
      for (Index v = home[1] - span[1]; v <= home[1] + span[1]; ++v)
        for (Index w = home[2] - span[2]; w <= home[2] + span[2]; ++w) {
          const auto it = cells.find({u, v, w});
          if (it == cells.end()) continue;
          for (int j : it->second) {
            if (j <= static_cast<int>(i)) continue;
            const Coord& o = centers[j];
            if (std::abs(o[0] - c[0]) > reach[0] || std::abs(o[1] - c[1]) > reach[1] ||
                std::abs(o[2] - c[2]) > reach[2])
              continue;
            pairs.emplace_back(static_cast<int>(i), j);
          }
        }
  }
  std::sort(pairs.begin(), pairs.end());
  return evaluate_pairs(field, std::move(nodes), fps, pairs, threads);
}

PatchGraph build_graph_exhaustive(const ConsensusField& field, const PatchForeground& fg_of,
                                  const PatchSelection& selection) {
  std::vector<Index> nodes = selected_pixels(selection);
  const auto fps = node_footprints(fg_of, field, nodes, 1);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(nodes.size()); ++j) pairs.emplace_back(i, j);
  return evaluate_pairs(field, std::move(nodes), fps, pairs, 1);
}

PatchSelection complete_overlaps(const PatchSelection& selection,
                                 const std::vector<ScoredPatch>& ranked,
                                 const PatchForeground& fg_of, const ConsensusField& field,
                                 const PixelSet& discard) {
  PatchSelection out = selection;
  if (discard.pixels.empty()) return out;
  const Grid& grid = field.grid();
  const PredictionBundle& b = fg_of.bundle();
  const PatchGeometry& g = b.geometry;
  constexpr std::size_t kRequired = 2;

  std::unordered_map<Index, std::size_t> rank_of;
  for (std::size_t r = 0; r < ranked.size(); ++r) rank_of.emplace(ranked[r].pixel, r);
  std::unordered_map<Index, bool> selected;
  for (const auto& p : out.patches) selected[p.pixel] = true;

  std::unordered_map<Index, Footprint> fp_cache;
  auto fp = [&](Index x) -> const Footprint& {
    auto it = fp_cache.find(x);
    if (it == fp_cache.end()) it = fp_cache.emplace(x, footprint_of(fg_of, field, x)).first;
    return it->second;
  };
  std::map<std::pair<Index, Index>, bool> distinct_cache;
  auto distinct = [&](Index a, Index c) {
    const auto key = std::minmax(a, c);
    auto it = distinct_cache.find(key);
    if (it != distinct_cache.end()) return it->second;
    const auto w = ordered_affinity(field, fp(key.first), key.first, fp(key.second), key.second);
    const bool d = w && *w < 0.0;
    distinct_cache.emplace(key, d);
    return d;
  };

  for (Index q : discard.pixels) {
    if (fg_of.domain() && !(*fg_of.domain())[q]) continue;
    const Coord cq = grid.coord(q);
    std::vector<std::size_t> claimants;
    for (int ch = 0; ch < g.channels(); ++ch) {
      const Coord& d = g.offset(ch);
      const Coord cx{cq[0] - d[0], cq[1] - d[1], cq[2] - d[2]};
      if (!grid.contains(cx)) continue;
      const Index x = grid.linear(cx);
      const auto it = rank_of.find(x);
      if (it == rank_of.end() || !(b.prob(x, ch) > b.t)) continue;
      claimants.push_back(it->second);
    }
    std::sort(claimants.begin(), claimants.end());

    std::vector<Index> reps;
    auto admit = [&](Index x) {
      for (Index r : reps)
        if (!distinct(x, r)) return false;
      reps.push_back(x);
      return true;
    };
    for (std::size_t r : claimants)
      if (selected.contains(ranked[r].pixel)) admit(ranked[r].pixel);
    for (std::size_t r : claimants) {
      if (reps.size() >= kRequired) break;
      const ScoredPatch& p = ranked[r];
      if (selected.contains(p.pixel)) continue;
      if (admit(p.pixel)) {
        selected[p.pixel] = true;
        out.patches.push_back(p);
      }
    }
  }
  return out;
}

void write_edge_list(std::ostream& out, const SignedGraph& graph) {
  out << "# nodes " << graph.nodes << '\n';
  char buf[64];
  for (const Edge& e : graph.edges) {
    std::snprintf(buf, sizeof buf, "%.9g", e.weight);
    out << e.a << ' ' << e.b << ' ' << buf << '\n';
  }
}

SignedGraph read_edge_list(std::istream& in) {
  SignedGraph g;
  int declared = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      int n = 0;
      if (hs >> key >> n && key == "nodes") declared = n;
      continue;
    }
    std::istringstream ls(line);
    Edge e;
    std::string rest;
    if (!(ls >> e.a >> e.b >> e.weight) || (ls >> rest) || e.a < 0 || e.b < 0 || e.a == e.b)
      throw ValidationError("malformed edge list line " + std::to_string(line_no));
    g.nodes = std::max({g.nodes, e.a + 1, e.b + 1});
    g.edges.push_back(e);
  }
  if (declared >= 0) {
    if (declared < g.nodes) throw ValidationError("edge list references nodes beyond its header");
    g.nodes = declared;
  }
  return g;
}

}  // namespace patchasm
