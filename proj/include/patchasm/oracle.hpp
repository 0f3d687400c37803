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
#include <stdexcept>
#include <string_view>
#include <vector>

#include "patchasm/core.hpp"

namespace patchasm {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based generator: draw k of stream s under seed is
///   splitmix64(key + k * 0x9E3779B97F4A7C15), key = splitmix64(seed ^ splitmix64(s)).
/// Uniforms take the top 53 bits; normals use Box-Muller on draws 2k and 2k+1.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(splitmix64(seed ^ splitmix64(stream))) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ull);
  }
  /// Uniform in [0, 1).
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

/// Sequential view of a CounterRng.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}
  double uniform() { return rng_.uniform(next_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform() * static_cast<double>(hi - lo + 1));
  }
  double normal() { return rng_.normal(next_++); }

 private:
  CounterRng rng_;
  std::uint64_t next_ = 0;
};

struct NoiseSpec {
  double flip_prob = 0.0;
  double jitter_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Bounds applied to jittered probabilities.
inline constexpr double kProbabilityFloor = 1e-6;

/// Perfect predictions for `gt`: p(x, dx) = 1 iff x and x + dx are foreground of
/// a common instance. Pixels covered by two or more instances get an all-0.5
/// patch plane; instance-count classes are one-hot.
PredictionBundle synth(const GroundTruth& gt, const PatchGeometry& geometry, double t = 0.9,
                       double fg_threshold = 0.5);

/// Flips each patch entry v -> 1 - v with probability flip_prob, then, when
/// jitter_sigma > 0, adds N(0, sigma) noise in logit space and clamps to
/// [1e-6, 1 - 1e-6]. Foreground and instance-count maps are left untouched.
PredictionBundle corrupt(const PredictionBundle& bundle, const NoiseSpec& noise);

class PlacementFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ShapeKind { Blobs, Strips, CrossingStrips };

ShapeKind parse_shape_kind(std::string_view name);
std::string_view to_string(ShapeKind kind);

struct ShapeParams {
  std::vector<Index> shape{64, 64};
  int min_count = 3;
  int max_count = 8;
  /// Blob semi-axes.
  double min_radius = 3.0;
  double max_radius = 9.0;
  /// Strip thickness in pixels and segment lengths.
  int strip_width = 5;
  double min_length = 20.0;
  double max_length = 40.0;
  /// Crossing strips: the overlap must be narrower than this on every axis.
  int max_overlap_extent = 13;
  int max_attempts = 2000;
};

GroundTruth make_shapes(ShapeKind kind, const ShapeParams& params, std::uint64_t seed);

/// Per-pixel instance count.
std::vector<int> instance_counts(const GroundTruth& gt);

}  // namespace patchasm
