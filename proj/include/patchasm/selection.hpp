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

#include <stdexcept>
#include <vector>

#include "patchasm/consensus.hpp"
#include "patchasm/core.hpp"

namespace patchasm {

struct ScoredPatch {
  Index pixel = 0;
  double score = 0.0;
  int fg_size = 0;

  bool operator==(const ScoredPatch&) const = default;
};

/// Rank order: score descending, then foreground size descending, then pixel index.
inline bool ranks_before(const ScoredPatch& a, const ScoredPatch& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.fg_size != b.fg_size) return a.fg_size > b.fg_size;
  return a.pixel < b.pixel;
}

class EmptyForeground : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Agreement of patch x with the consensus, in [-1, 1]. Pairs whose affinity is
/// undefined add nothing to the sum but still count in the normalizer. A patch
/// with no pixel pairs in its window scores 0.
double score_patch(const ConsensusField& field, const PredictionBundle& bundle, Index x);

/// Scores every foreground patch outside `discard` and sorts by `ranks_before`.
std::vector<ScoredPatch> rank(const ConsensusField& field, const PredictionBundle& bundle,
                              const PixelSet& foreground, const PixelSet& discard,
                              int threads = 1);

struct PatchSelection {
  std::vector<ScoredPatch> patches;
  /// Covered part of foreground \ discard.
  Mask coverage;
  /// Pixels of foreground \ discard covered by no selected patch, ascending.
  std::vector<Index> uncovered;

  std::size_t size() const { return patches.size(); }
};

/// Walks the ranked list once, keeping each patch that covers at least one
/// still-uncovered pixel of foreground \ discard.
PatchSelection greedy_cover(const std::vector<ScoredPatch>& ranked, const PatchForeground& fg_of,
                            const PixelSet& foreground, const PixelSet& discard);

/// Repeatedly keeps the pre-selected patch covering the most still-uncovered
/// pixels (ties: higher score, then lower pixel index) until the
/// pre-selection's coverage is reproduced.
PatchSelection thin_out(const PatchSelection& preselection, const PatchForeground& fg_of,
                        const PixelSet& foreground, const PixelSet& discard);

}  // namespace patchasm
