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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patchasm/assembly.hpp"
#include "patchasm/config.hpp"
#include "patchasm/consensus.hpp"
#include "patchasm/patch_graph.hpp"
#include "patchasm/selection.hpp"

namespace patchasm {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  InstanceSegmentation segmentation;
  std::vector<StageTiming> timings;
  std::vector<std::pair<std::string, std::int64_t>> counts;
  /// Intermediate products; empty on the dense baseline route.
  std::optional<ConsensusField> field;
  std::vector<ScoredPatch> ranked;
  PatchSelection selection;
  PatchGraph graph;

  double total_seconds() const;
  std::int64_t count(const std::string& name) const;
};

/// Runs the assembly on a bundle whose thresholds are already set. The route
/// (patch pipeline or dense baseline), partitioner, passes and thread count
/// come from `config`.
PipelineResult run_pipeline(const PredictionBundle& bundle, const PipelineConfig& config);

/// Patch score per predicting pixel; NaN where no patch was scored.
Tensor<float> score_image(const Grid& grid, const std::vector<ScoredPatch>& ranked);

}  // namespace patchasm
