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
#include <vector>

#include "patchasm/core.hpp"
#include "patchasm/partition.hpp"
#include "patchasm/selection.hpp"

namespace patchasm {

/// Overlap-capable instances plus a flattened label map (0 = background,
/// instance i has id i + 1).
struct InstanceSegmentation {
  Grid grid;
  std::vector<Mask> masks;
  std::vector<std::uint32_t> label_map;
  /// Selected patches that make up each instance.
  std::vector<std::vector<ScoredPatch>> provenance;

  std::size_t size() const { return masks.size(); }
};

/// Instance i is the union of the patch foregrounds of the selected patches
/// labeled i. The label map is filled by `flatten`.
InstanceSegmentation assemble(const PatchSelection& selection, const Partition& partition,
                              const PatchForeground& fg_of);

/// Per pixel, the id of the claiming patch with the highest probability there
/// (ties: higher score, then lower predicting-pixel index).
std::vector<std::uint32_t> flatten(const InstanceSegmentation& seg, const PatchForeground& fg_of);

/// Drops instances with fewer than `min_size` pixels and renumbers the rest.
/// Label-map pixels of dropped instances become background.
InstanceSegmentation filter_small(const InstanceSegmentation& seg, std::size_t min_size);

/// Instances from a pixel-level partition (one mask per component).
InstanceSegmentation from_dense_partition(const Grid& grid, const DensePartition& dense);

}  // namespace patchasm
