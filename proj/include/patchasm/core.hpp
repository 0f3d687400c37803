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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace patchasm {

using Index = std::int64_t;

/// Spatial coordinate. 2D data lives in the trailing two axes with axis 0 fixed at 0.
using Coord = std::array<Index, 3>;

/// A boolean per-pixel mask over a Grid (0/1 bytes).
using Mask = std::vector<std::uint8_t>;

/// Raised for any violated input contract (shapes, ranges, dtypes at the API level).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// C-order spatial domain of rank 2 or 3. A 2D grid is stored as 1 x H x W.
class Grid {
 public:
  Grid() = default;
  /// `shape` holds 2 or 3 positive extents.
  explicit Grid(std::span<const Index> shape);
  Grid(std::initializer_list<Index> shape)
      : Grid(std::span<const Index>(shape.begin(), shape.size())) {}

  int dims() const { return dims_; }
  const Coord& shape3() const { return shape_; }
  const Coord& strides3() const { return strides_; }
  Index size() const { return shape_[0] * shape_[1] * shape_[2]; }
  std::vector<Index> shape() const;

  Coord coord(Index lin) const {
    return {lin / strides_[0], (lin / strides_[1]) % shape_[1], lin % shape_[2]};
  }
  Index linear(const Coord& c) const {
    return c[0] * strides_[0] + c[1] * strides_[1] + c[2];
  }
  bool contains(const Coord& c) const {
    return c[0] >= 0 && c[0] < shape_[0] && c[1] >= 0 && c[1] < shape_[1] &&
           c[2] >= 0 && c[2] < shape_[2];
  }

  bool operator==(const Grid& o) const {
    return dims_ == o.dims_ && shape_ == o.shape_;
  }

 private:
  int dims_ = 2;
  Coord shape_{1, 1, 1};
  Coord strides_{1, 1, 1};
};

/// Dense C-order tensor with value semantics.
template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, T fill = T{})
      : shape_(std::move(shape)), data_(count(shape_), fill) {}
  Tensor(std::vector<std::size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_))
      throw ValidationError("tensor data size does not match its shape");
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  bool operator==(const Tensor&) const = default;

  static std::size_t count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

/// Axis-aligned odd-sized box of offsets around the predicting pixel.
///
/// Channel c corresponds to offset `offset(c)`; offsets are enumerated in
/// lexicographic order so the center offset sits at channel (|P|-1)/2.
/// The derived affinity neighborhood P - P is the box of extents 2e-1; only
/// its canonical half (offsets >= 0 lexicographically, including 0) is
/// addressed, via `plane_of`.
class PatchGeometry {
 public:
  PatchGeometry() = default;
  explicit PatchGeometry(std::vector<int> extents);

  int dims() const { return dims_; }
  const std::vector<int>& extents() const { return extents_; }
  int channels() const { return static_cast<int>(offsets_.size()); }
  int center_channel() const { return channels() / 2; }
  const Coord& offset(int channel) const { return offsets_[channel]; }
  const std::vector<Coord>& offsets() const { return offsets_; }
  /// Channel of an offset, or -1 when it lies outside the box.
  int channel_of(const Coord& d) const;
  /// Per-axis half width, padded to three axes.
  const Coord& radius() const { return radius_; }

  /// Number of canonical planes of the affinity neighborhood: |N|/2 + 1.
  int planes() const { return planes_; }
  /// Canonical offset of a plane.
  Coord plane_offset(int plane) const;
  /// Plane of a pair offset d = z - y. Returns nullopt when d is out of range.
  /// `canonical` is set when d itself (rather than -d) is the stored direction.
  std::optional<int> plane_of(const Coord& d, bool* canonical = nullptr) const;
  /// Strides of the pair-offset box: for in-range d, the plane is
  /// |sum_a d[a] * pair_stride()[a]| and d is canonical when that sum is >= 0.
  const Coord& pair_stride() const { return pair_stride_; }

  bool operator==(const PatchGeometry& o) const { return extents_ == o.extents_; }

 private:
  int dims_ = 0;
  std::vector<int> extents_;
  std::vector<Coord> offsets_;
  Coord radius_{0, 0, 0};
  Coord pair_extent_{1, 1, 1};
  Coord pair_stride_{1, 1, 1};
  int planes_ = 0;
  Index pair_center_ = 0;
};

enum class PixelClass : std::uint8_t { Background, Uncertain, Foreground };

/// Threshold rule shared by every stage: strictly above t is foreground,
/// strictly below 1 - t is background.
inline PixelClass classify_value(double p, double t) {
  if (p > t) return PixelClass::Foreground;
  if (p < 1.0 - t) return PixelClass::Background;
  return PixelClass::Uncertain;
}

/// Number of per-pixel instance-count classes: 0, 1, >=2.
inline constexpr int kInstanceCountClasses = 3;

/// Dense per-pixel shape-patch predictions plus foreground and optional
/// instance-count estimates. Construct through `make_bundle`, which validates.
struct PredictionBundle {
  PatchGeometry geometry;
  Grid grid;
  Tensor<float> patch_probs;                 // [|P|, spatial...]
  Tensor<float> fg_probs;                    // [spatial...]
  std::optional<Tensor<float>> ninst_probs;  // [3, spatial...]
  double t = 0.9;
  double fg_threshold = 0.5;

  float prob(Index x, int channel) const {
    return patch_probs[static_cast<std::size_t>(channel) * grid.size() + x];
  }
};

PredictionBundle make_bundle(PatchGeometry geometry, Tensor<float> patch_probs,
                             Tensor<float> fg_probs,
                             std::optional<Tensor<float>> ninst_probs,
                             double t = 0.9, double fg_threshold = 0.5);

/// Throws ValidationError on any violated bundle invariant.
void validate(const PredictionBundle& bundle);

/// Channel indices of one patch split by class, clipped to the image.
struct PatchClasses {
  std::vector<int> foreground;
  std::vector<int> background;
  std::vector<int> uncertain;
};

PatchClasses classify(const PredictionBundle& bundle, Index x);

/// A pixel set held both densely and as a sorted index list.
struct PixelSet {
  Mask mask;
  std::vector<Index> pixels;

  static PixelSet from_mask(Mask mask);
  bool contains(Index x) const { return mask[x] != 0; }
  std::size_t count() const { return pixels.size(); }
};

PixelSet image_foreground(const PredictionBundle& bundle);
PixelSet overlap_mask(const PredictionBundle& bundle);

/// Per-instance binary masks; masks may overlap.
struct GroundTruth {
  Grid grid;
  std::vector<Mask> masks;
};

void validate(const GroundTruth& gt);

/// Pixels of one patch window, in channel order, clipped to the image and
/// optionally restricted to `domain` and stripped of `exclude`.
struct PatchWindow {
  std::vector<int> channel;
  std::vector<Index> pixel;
  std::vector<float> prob;
  std::vector<PixelClass> cls;

  std::size_t size() const { return pixel.size(); }
  void clear() {
    channel.clear();
    pixel.clear();
    prob.clear();
    cls.clear();
  }
};

void gather_window(const PredictionBundle& bundle, Index x, const Mask* domain,
                   const Mask* exclude, PatchWindow& out);

/// fg(p_x) as sorted pixel indices, restricted to `domain` when given.
class PatchForeground {
 public:
  PatchForeground(const PredictionBundle& bundle, const Mask* domain)
      : bundle_(&bundle), domain_(domain) {}
  std::vector<Index> operator()(Index x) const;
  void collect(Index x, std::vector<Index>& out) const;
  const PredictionBundle& bundle() const { return *bundle_; }
  const Mask* domain() const { return domain_; }

 private:
  const PredictionBundle* bundle_;
  const Mask* domain_;
};

}  // namespace patchasm
