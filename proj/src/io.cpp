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

#include "patchasm/io.hpp"

#include <numeric>

#include "patchasm/npy.hpp"

namespace patchasm {

namespace fs = std::filesystem;

std::vector<std::size_t> spatial_shape(const Grid& grid) {
  std::vector<std::size_t> out;
  for (Index e : grid.shape()) out.push_back(static_cast<std::size_t>(e));
  return out;
}

namespace {

std::vector<std::size_t> with_leading(std::size_t n, const Grid& grid) {
  auto shape = spatial_shape(grid);
  shape.insert(shape.begin(), n);
  return shape;
}

Grid grid_of(const std::vector<std::size_t>& spatial, const std::string& what) {
  if (spatial.size() != 2 && spatial.size() != 3)
    throw ValidationError(what + " must have 2 or 3 spatial axes");
  std::vector<Index> ext(spatial.begin(), spatial.end());
  for (Index e : ext)
    if (e < 1) throw ValidationError(what + " has an empty spatial axis");
  return Grid(std::span<const Index>(ext));
}

}  // namespace

void write_bundle(const fs::path& dir, const PredictionBundle& b) {
  fs::create_directories(dir);
  write_npy(dir / "patch_probs.npy", b.patch_probs);
  write_npy(dir / "fg_probs.npy", b.fg_probs);
  if (b.ninst_probs) write_npy(dir / "ninst_probs.npy", *b.ninst_probs);
}

PredictionBundle read_bundle(const fs::path& dir, const std::vector<int>& patch, double t,
                             double fg_threshold) {
  auto patch_probs = read_npy<float>(dir / "patch_probs.npy");
  auto fg_probs = read_npy<float>(dir / "fg_probs.npy");
  std::optional<Tensor<float>> ninst;
  if (fs::exists(dir / "ninst_probs.npy")) ninst = read_npy<float>(dir / "ninst_probs.npy");
  const std::size_t channels =
      std::accumulate(patch.begin(), patch.end(), std::size_t{1},
                      [](std::size_t a, int e) { return a * static_cast<std::size_t>(e); });
  if (patch_probs.rank() == 0 || patch_probs.shape()[0] != channels)
    throw ValidationError("patch_probs has " +
                          std::to_string(patch_probs.rank() ? patch_probs.shape()[0] : 0) +
                          " channels but the configured patch has " + std::to_string(channels));
  if (patch.size() != fg_probs.rank())
    throw ValidationError("patch rank " + std::to_string(patch.size()) +
                          " does not match the image rank " + std::to_string(fg_probs.rank()));
  return make_bundle(PatchGeometry(patch), std::move(patch_probs), std::move(fg_probs), std::move(ninst),
                     t, fg_threshold);
}

Tensor<std::uint8_t> instance_stack(const Grid& grid, const std::vector<Mask>& masks) {
  std::vector<std::uint8_t> data;
  data.reserve(masks.size() * static_cast<std::size_t>(grid.size()));
  for (const Mask& m : masks) {
    if (static_cast<Index>(m.size()) != grid.size()) throw ValidationError("mask shape disagrees with the grid");
    for (auto v : m) data.push_back(v ? 1 : 0);
  }
  return Tensor<std::uint8_t>(with_leading(masks.size(), grid), std::move(data));
}

void write_instances(const fs::path& path, const Grid& grid, const std::vector<Mask>& masks) {
  write_npy(path, instance_stack(grid, masks));
}

GroundTruth read_instances(const fs::path& path) {
  const auto stack = read_npy<std::uint8_t>(path);
  if (stack.rank() != 3 && stack.rank() != 4)
    throw ValidationError(path.string() + ": instance stack must have shape [N, spatial] with 2 or 3 spatial axes");
  const std::vector<std::size_t> spatial(stack.shape().begin() + 1, stack.shape().end());
  GroundTruth out;
  out.grid = grid_of(spatial, path.string());
  const std::size_t n = stack.shape()[0];
  const auto px = static_cast<std::size_t>(out.grid.size());
  out.masks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.masks[i].assign(stack.values().begin() + i * px, stack.values().begin() + (i + 1) * px);
    for (auto& v : out.masks[i]) v = v ? 1 : 0;
  }
  return out;
}

void write_labels(const fs::path& path, const Grid& grid, const std::vector<std::uint32_t>& labels) {
  write_npy(path, Tensor<std::uint32_t>(spatial_shape(grid), labels));
}

}  // namespace patchasm
