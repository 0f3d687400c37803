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
#include <optional>
#include <vector>

#include "patchasm/core.hpp"

namespace patchasm {

/// Lookup from an ordered pair of patch channels (i, j) to the affinity plane
/// holding the pixel pair (x + offset(i), x + offset(j)), and to which of the
/// two pixels anchors the stored entry.
class PairTable {
 public:
  explicit PairTable(const PatchGeometry& geometry);

  int plane(int i, int j) const { return code_[index(i, j)] >> 1; }
  /// True when pixel i is the anchor (lower linear index) of the pair.
  bool anchored_at_first(int i, int j) const { return code_[index(i, j)] & 1; }
  std::int32_t code(int i, int j) const { return code_[index(i, j)]; }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * channels_ + j;
  }
  int channels_;
  std::vector<std::int32_t> code_;
};

struct ConsensusOptions {
  bool sparse = true;
  int threads = 1;
};

/// Accumulated consensus affinities, one entry per unordered pixel pair within
/// the affinity neighborhood. Each entry stores the signed vote sum and the
/// informative-patch count; the affinity is their ratio.
class ConsensusField {
 public:
  const PatchGeometry& geometry() const { return geometry_; }
  const Grid& grid() const { return grid_; }
  int planes() const { return planes_; }
  bool sparse() const { return sparse_; }
  /// Image foreground used to restrict patches in sparse mode; null when dense.
  const Mask* domain() const { return sparse_ ? &domain_ : nullptr; }

  /// Storage slot of an anchor pixel, or -1 when the pixel holds no entries.
  Index slot(Index pixel) const { return slot_of_.empty() ? pixel : slot_of_[pixel]; }

  std::optional<double> aff(Index y, Index z) const;

  /// Entry by storage slot and plane; nullopt when the count is zero.
  std::optional<double> entry(Index slot, int plane) const {
    const std::size_t e = static_cast<std::size_t>(slot) * planes_ + plane;
    if (count_[e] == 0) return std::nullopt;
    return numerator_[e] / count_[e];
  }

  double numerator(Index anchor, int plane) const;
  std::uint32_t z_count(Index anchor, int plane) const;

  /// Dense dumps with shape [planes, spatial...]; pixels without storage read 0.
  Tensor<double> numerator_planes() const;
  Tensor<std::uint32_t> count_planes() const;

  std::size_t entries() const { return numerator_.size(); }

 private:
  friend ConsensusField accumulate(const PredictionBundle&, const PixelSet&, const PixelSet&,
                                   const ConsensusOptions&);
  PatchGeometry geometry_;
  Grid grid_;
  int planes_ = 0;
  bool sparse_ = false;
  Mask domain_;
  std::vector<Index> slot_of_;
  std::vector<double> numerator_;
  std::vector<std::uint32_t> count_;
};

/// Sums the signed pair votes of every predicting pixel outside `discard`
/// (only foreground pixels in sparse mode, with patches clipped to the
/// foreground). Pairs touching `discard` receive no votes.
ConsensusField accumulate(const PredictionBundle& bundle, const PixelSet& foreground,
                          const PixelSet& discard, const ConsensusOptions& options);

}  // namespace patchasm
