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

#include <iosfwd>
#include <optional>
#include <vector>

#include "patchasm/consensus.hpp"
#include "patchasm/core.hpp"
#include "patchasm/partition.hpp"
#include "patchasm/selection.hpp"

namespace patchasm {

/// Signed affinity graph over selected patches. Node i is the patch predicted
/// at `nodes[i]`; edges are sorted by (a, b) with a < b.
struct PatchGraph {
  std::vector<Index> nodes;
  SignedGraph graph;

  /// Neighbors of each node as indices into `graph.edges`.
  std::vector<std::vector<int>> adjacency() const;
};

/// Mean consensus affinity between the foregrounds of patches a and b over the
/// pixel pairs that have a defined affinity; nullopt when there are none.
/// Symmetric bit for bit.
std::optional<double> paff(const ConsensusField& field, const PatchForeground& fg_of, Index a,
                           Index b);

/// Evaluates paff for every pair of selected patches whose centers are within
/// the structural reach (two patch diameters per axis), using a uniform grid
/// of patch-sized cells to enumerate candidates.
PatchGraph build_graph(const ConsensusField& field, const PatchForeground& fg_of,
                       const PatchSelection& selection, int threads = 1);

/// Reference construction evaluating paff over all node pairs.
PatchGraph build_graph_exhaustive(const ConsensusField& field, const PatchForeground& fg_of,
                                  const PatchSelection& selection);

/// Adds patches so that every discarded (overlap) pixel is claimed by at least
/// two selected patches with negative mutual paff, i.e. by two instances.
/// Candidates are taken in rank order among ranked patches claiming the pixel.
PatchSelection complete_overlaps(const PatchSelection& selection,
                                 const std::vector<ScoredPatch>& ranked,
                                 const PatchForeground& fg_of, const ConsensusField& field,
                                 const PixelSet& discard);

/// Edge list text: optional `# nodes N` header, then one `a b weight` line per
/// edge with the weight printed to 9 significant digits.
void write_edge_list(std::ostream& out, const SignedGraph& graph);
SignedGraph read_edge_list(std::istream& in);

}  // namespace patchasm
