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

#include "patchasm/core.hpp"

#include <algorithm>
#include <cmath>

namespace patchasm {

Grid::Grid(std::span<const Index> shape) {
  if (shape.size() != 2 && shape.size() != 3)
    throw ValidationError("spatial rank must be 2 or 3");
  for (Index s : shape)
    if (s <= 0) throw ValidationError("spatial extents must be positive");
  dims_ = static_cast<int>(shape.size());
  const std::size_t pad = 3 - shape.size();
  for (std::size_t i = 0; i < shape.size(); ++i) shape_[pad + i] = shape[i];
  strides_ = {shape_[1] * shape_[2], shape_[2], 1};
}

std::vector<Index> Grid::shape() const {
  return std::vector<Index>(shape_.begin() + (3 - dims_), shape_.end());
}

PatchGeometry::PatchGeometry(std::vector<int> extents) : extents_(std::move(extents)) {
  if (extents_.size() != 2 && extents_.size() != 3)
    throw ValidationError("patch geometry must be 2D or 3D");
  for (int e : extents_)
    if (e <= 0 || e % 2 == 0) throw ValidationError("patch extents must be odd and positive");
  dims_ = static_cast<int>(extents_.size());
  const std::size_t pad = 3 - extents_.size();
  Coord ext{1, 1, 1};
  for (std::size_t i = 0; i < extents_.size(); ++i) ext[pad + i] = extents_[i];
  for (int a = 0; a < 3; ++a) {
    radius_[a] = ext[a] / 2;
    pair_extent_[a] = 2 * ext[a] - 1;
  }
  pair_stride_ = {pair_extent_[1] * pair_extent_[2], pair_extent_[2], 1};
  for (Index i = -radius_[0]; i <= radius_[0]; ++i)
    for (Index j = -radius_[1]; j <= radius_[1]; ++j)
      for (Index k = -radius_[2]; k <= radius_[2]; ++k) offsets_.push_back({i, j, k});
  const Index pair_total = pair_extent_[0] * pair_extent_[1] * pair_extent_[2];
  pair_center_ = (pair_total - 1) / 2;
  planes_ = static_cast<int>(pair_center_ + 1);
}

int PatchGeometry::channel_of(const Coord& d) const {
  Index c = 0;
  for (int a = 0; a < 3; ++a) {
    if (d[a] < -radius_[a] || d[a] > radius_[a]) return -1;
    c = c * (2 * radius_[a] + 1) + (d[a] + radius_[a]);
  }
  return static_cast<int>(c);
}

Coord PatchGeometry::plane_offset(int plane) const {
  Index f = pair_center_ + plane;
  Coord d{};
  for (int a = 0; a < 3; ++a) {
    d[a] = f / pair_stride_[a] - 2 * radius_[a];
    f %= pair_stride_[a];
  }
  return d;
}

std::optional<int> PatchGeometry::plane_of(const Coord& d, bool* canonical) const {
  Index f = 0;
  for (int a = 0; a < 3; ++a) {
    const Index r = 2 * radius_[a];
    if (d[a] < -r || d[a] > r) return std::nullopt;
    f += (d[a] + r) * pair_stride_[a];
  }
  if (canonical) *canonical = f >= pair_center_;
  return static_cast<int>(f >= pair_center_ ? f - pair_center_ : pair_center_ - f);
}

namespace {

void check_probabilities(std::span<const float> values, const char* what) {
  for (float v : values)
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
      throw ValidationError(std::string(what) + " must be finite and within [0,1]");
}

Grid grid_from_trailing(const std::vector<std::size_t>& shape, std::size_t lead) {
  std::vector<Index> spatial;
  for (std::size_t i = lead; i < shape.size(); ++i) spatial.push_back(static_cast<Index>(shape[i]));
  return Grid(spatial);
}

}  // namespace

void validate(const PredictionBundle& b) {
  if (!(b.t >= 0.5 && b.t <= 1.0))
    throw ValidationError("patch threshold t must lie in [0.5, 1]");
  if (!(b.fg_threshold > 0.0 && b.fg_threshold < 1.0))
    throw ValidationError("fg_threshold must lie in (0, 1)");
  if (b.grid.dims() != b.geometry.dims())
    throw ValidationError("patch geometry rank does not match the image rank");
  const auto& ps = b.patch_probs.shape();
  if (ps.size() != static_cast<std::size_t>(b.grid.dims()) + 1 ||
      ps[0] != static_cast<std::size_t>(b.geometry.channels()))
    throw ValidationError("patch_probs must have shape [|P|, spatial...]");
  if (!(grid_from_trailing(ps, 1) == b.grid))
    throw ValidationError("patch_probs spatial shape disagrees with the bundle grid");
  if (!(grid_from_trailing(b.fg_probs.shape(), 0) == b.grid))
    throw ValidationError("fg_probs spatial shape disagrees with patch_probs");
  check_probabilities(b.patch_probs.data(), "patch_probs");
  check_probabilities(b.fg_probs.data(), "fg_probs");
  if (b.ninst_probs) {
    const auto& ns = b.ninst_probs->shape();
    if (ns.size() != ps.size() || ns[0] != static_cast<std::size_t>(kInstanceCountClasses) ||
        !(grid_from_trailing(ns, 1) == b.grid))
      throw ValidationError("ninst_probs must have shape [3, spatial...]");
    check_probabilities(b.ninst_probs->data(), "ninst_probs");
  }
}

PredictionBundle make_bundle(PatchGeometry geometry, Tensor<float> patch_probs,
                             Tensor<float> fg_probs, std::optional<Tensor<float>> ninst_probs,
                             double t, double fg_threshold) {
  if (patch_probs.rank() < 3)
    throw ValidationError("patch_probs must have shape [|P|, spatial...]");
  PredictionBundle b;
  b.grid = grid_from_trailing(patch_probs.shape(), 1);
  b.geometry = std::move(geometry);
  b.patch_probs = std::move(patch_probs);
  b.fg_probs = std::move(fg_probs);
  b.ninst_probs = std::move(ninst_probs);
  b.t = t;
  b.fg_threshold = fg_threshold;
  validate(b);
  return b;
}

PatchClasses classify(const PredictionBundle& b, Index x) {
  PatchClasses out;
  const Coord c = b.grid.coord(x);
  for (int ch = 0; ch < b.geometry.channels(); ++ch) {
    const Coord& d = b.geometry.offset(ch);
    const Coord y{c[0] + d[0], c[1] + d[1], c[2] + d[2]};
    if (!b.grid.contains(y)) continue;
    switch (classify_value(b.prob(x, ch), b.t)) {
      case PixelClass::Foreground: out.foreground.push_back(ch); break;
      case PixelClass::Background: out.background.push_back(ch); break;
      case PixelClass::Uncertain: out.uncertain.push_back(ch); break;
    }
  }
  return out;
}

PixelSet PixelSet::from_mask(Mask mask) {
  PixelSet s;
  s.mask = std::move(mask);
  for (std::size_t i = 0; i < s.mask.size(); ++i)
    if (s.mask[i]) s.pixels.push_back(static_cast<Index>(i));
  return s;
}

PixelSet image_foreground(const PredictionBundle& b) {
  Mask m(b.grid.size(), 0);
  for (Index i = 0; i < b.grid.size(); ++i) m[i] = b.fg_probs[i] > b.fg_threshold;
  return PixelSet::from_mask(std::move(m));
}

PixelSet overlap_mask(const PredictionBundle& b) {
  const Index n = b.grid.size();
  Mask m(n, 0);
  if (b.ninst_probs) {
    const auto& np = *b.ninst_probs;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      for (int k = 1; k < kInstanceCountClasses; ++k)
        if (np[k * n + i] > np[best * n + i]) best = k;
      m[i] = best >= 2;
    }
  }
  return PixelSet::from_mask(std::move(m));
}

void validate(const GroundTruth& gt) {
  if (gt.masks.empty()) throw ValidationError("ground truth has no instances");
  for (const auto& m : gt.masks) {
    if (static_cast<Index>(m.size()) != gt.grid.size())
      throw ValidationError("ground-truth mask shape disagrees with the grid");
    if (std::none_of(m.begin(), m.end(), [](auto v) { return v != 0; }))
      throw ValidationError("ground-truth mask is empty");
  }
}

void gather_window(const PredictionBundle& b, Index x, const Mask* domain, const Mask* exclude,
                   PatchWindow& out) {
  out.clear();
  const Coord c = b.grid.coord(x);
  const Index n = b.grid.size();
  const float* probs = b.patch_probs.data().data();
  const auto& offsets = b.geometry.offsets();
  for (int ch = 0; ch < static_cast<int>(offsets.size()); ++ch) {
    const Coord& d = offsets[ch];
    const Coord y{c[0] + d[0], c[1] + d[1], c[2] + d[2]};
    if (!b.grid.contains(y)) continue;
    const Index ly = b.grid.linear(y);
    if (domain && !(*domain)[ly]) continue;
    if (exclude && (*exclude)[ly]) continue;
    const float p = probs[ch * n + x];
    out.channel.push_back(ch);
    out.pixel.push_back(ly);
    out.prob.push_back(p);
    out.cls.push_back(classify_value(p, b.t));
  }
}

void PatchForeground::collect(Index x, std::vector<Index>& out) const {
  out.clear();
  const auto& b = *bundle_;
  const Coord c = b.grid.coord(x);
  const Index n = b.grid.size();
  const float* probs = b.patch_probs.data().data();
  const auto& offsets = b.geometry.offsets();
  for (int ch = 0; ch < static_cast<int>(offsets.size()); ++ch) {
    if (!(probs[ch * n + x] > b.t)) continue;
    const Coord& d = offsets[ch];
    const Coord y{c[0] + d[0], c[1] + d[1], c[2] + d[2]};
    if (!b.grid.contains(y)) continue;
    const Index ly = b.grid.linear(y);
    if (domain_ && !(*domain_)[ly]) continue;
    out.push_back(ly);
  }
}

std::vector<Index> PatchForeground::operator()(Index x) const {
  std::vector<Index> out;
  collect(x, out);
  return out;
}

}  // namespace patchasm
