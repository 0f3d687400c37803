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

#include <filesystem>
#include <vector>

#include "patchasm/assembly.hpp"
#include "patchasm/core.hpp"

namespace patchasm {

/// Bundle directory layout: patch_probs.npy (f4 [|P|, spatial]), fg_probs.npy
/// (f4 [spatial]) and, when present, ninst_probs.npy (f4 [3, spatial]).
void write_bundle(const std::filesystem::path& dir, const PredictionBundle& bundle);
PredictionBundle read_bundle(const std::filesystem::path& dir, const std::vector<int>& patch,
                             double t, double fg_threshold);

/// Instance stacks are u1 [N, spatial].
Tensor<std::uint8_t> instance_stack(const Grid& grid, const std::vector<Mask>& masks);
void write_instances(const std::filesystem::path& path, const Grid& grid,
                     const std::vector<Mask>& masks);
/// Reads a stack of 2D or 3D masks.
GroundTruth read_instances(const std::filesystem::path& path);

void write_labels(const std::filesystem::path& path, const Grid& grid,
                  const std::vector<std::uint32_t>& labels);

std::vector<std::size_t> spatial_shape(const Grid& grid);

}  // namespace patchasm
