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

#include "patchasm/assembly.hpp"

#include <algorithm>
#include <limits>

namespace patchasm {

InstanceSegmentation assemble(const PatchSelection& selection, const Partition& partition,
                              const PatchForeground& fg_of) {
  if (partition.label.size() != selection.patches.size())
    throw ValidationError("partition does not label exactly the selected patches");
  const Grid& grid = fg_of.bundle().grid;
  InstanceSegmentation seg;
  seg.grid = grid;
  seg.masks.assign(partition.count, Mask(grid.size(), 0));
  seg.provenance.resize(partition.count);
  std::vector<Index> fg;
  for (std::size_t i = 0; i < selection.patches.size(); ++i) {
    const int id = partition.label[i];
    seg.provenance[id].push_back(selection.patches[i]);
    fg_of.collect(selection.patches[i].pixel, fg);
    for (Index q : fg) seg.masks[id][q] = 1;
  }
  seg.label_map = flatten(seg, fg_of);
  return seg;
}

std::vector<std::uint32_t> flatten(const InstanceSegmentation& seg, const PatchForeground& fg_of) {
  const PredictionBundle& b = fg_of.bundle();
  const Index n = seg.grid.size();
  std::vector<std::uint32_t> labels(n, 0);
  std::vector<float> best_p(n, -1.0f);
  std::vector<double> best_score(n, -std::numeric_limits<double>::infinity());
  std::vector<Index> best_x(n, std::numeric_limits<Index>::max());
  std::vector<Index> fg;
  for (std::size_t id = 0; id < seg.provenance.size(); ++id) {
    for (const ScoredPatch& patch : seg.provenance[id]) {
      fg_of.collect(patch.pixel, fg);
      const Coord cx = seg.grid.coord(patch.pixel);
      for (Index q : fg) {
        const Coord cq = seg.grid.coord(q);
        const int ch = b.geometry.channel_of({cq[0] - cx[0], cq[1] - cx[1], cq[2] - cx[2]});
        const float p = b.prob(patch.pixel, ch);
        const bool better =
            p != best_p[q] ? p > best_p[q]
            : patch.score != best_score[q] ? patch.score > best_score[q]
                                           : patch.pixel < best_x[q];
        if (!better) continue;
        best_p[q] = p;
        best_score[q] = patch.score;
        best_x[q] = patch.pixel;
        labels[q] = static_cast<std::uint32_t>(id + 1);
      }
    }
  }
  return labels;
}

InstanceSegmentation filter_small(const InstanceSegmentation& seg, std::size_t min_size) {
  InstanceSegmentation out;
  out.grid = seg.grid;
  std::vector<std::uint32_t> remap(seg.size() + 1, 0);
  for (std::size_t i = 0; i < seg.size(); ++i) {
    const auto size = static_cast<std::size_t>(std::count(seg.masks[i].begin(), seg.masks[i].end(), 1));
    if (size < min_size) continue;
    out.masks.push_back(seg.masks[i]);
    if (i < seg.provenance.size()) out.provenance.push_back(seg.provenance[i]);
    remap[i + 1] = static_cast<std::uint32_t>(out.masks.size());
  }
  out.label_map.resize(seg.label_map.size());
  for (std::size_t q = 0; q < seg.label_map.size(); ++q) out.label_map[q] = remap[seg.label_map[q]];
  return out;
}

InstanceSegmentation from_dense_partition(const Grid& grid, const DensePartition& dense) {
  InstanceSegmentation seg;
  seg.grid = grid;
  seg.masks.assign(dense.partition.count, Mask(grid.size(), 0));
  seg.label_map.assign(grid.size(), 0);
  for (std::size_t i = 0; i < dense.pixels.size(); ++i) {
    const int id = dense.partition.label[i];
    seg.masks[id][dense.pixels[i]] = 1;
    seg.label_map[dense.pixels[i]] = static_cast<std::uint32_t>(id + 1);
  }
  return seg;
}

}  // namespace patchasm
