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

#include "patchasm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace patchasm {

double CounterRng::normal(std::uint64_t counter) const {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<int> instance_counts(const GroundTruth& gt) {
  std::vector<int> count(gt.grid.size(), 0);
  for (const Mask& m : gt.masks)
    for (std::size_t i = 0; i < m.size(); ++i) count[i] += m[i] != 0;
  return count;
}

PredictionBundle synth(const GroundTruth& gt, const PatchGeometry& geometry, double t,
                       double fg_threshold) {
  validate(gt);
  if (geometry.dims() != gt.grid.dims())
    throw ValidationError("patch geometry rank does not match the ground truth");
  const Grid& grid = gt.grid;
  const Index n = grid.size();

  // Single-instance pixels carry their instance id; -1 is background and -2
  // marks pixels shared by several instances (resolved via `members`).
  std::vector<int> owner(n, -1);
  std::vector<std::vector<int>> members(n);
  for (int k = 0; k < static_cast<int>(gt.masks.size()); ++k)
    for (Index i = 0; i < n; ++i)
      if (gt.masks[k][i]) {
        members[i].push_back(k);
        owner[i] = owner[i] == -1 ? k : -2;
      }
  auto same_instance = [&](Index a, Index b) {
    if (owner[a] == -1 || owner[b] == -1) return false;
    if (owner[a] >= 0 && owner[b] >= 0) return owner[a] == owner[b];
    for (int u : members[a])
      if (std::find(members[b].begin(), members[b].end(), u) != members[b].end()) return true;
    return false;
  };

  std::vector<std::size_t> shape{static_cast<std::size_t>(geometry.channels())};
  for (Index s : grid.shape()) shape.push_back(static_cast<std::size_t>(s));
  Tensor<float> patch(shape, 0.0f);
  shape[0] = kInstanceCountClasses;
  Tensor<float> ninst(shape, 0.0f);
  std::vector<std::size_t> spatial(shape.begin() + 1, shape.end());
  Tensor<float> fg(spatial, 0.0f);

  for (Index x = 0; x < n; ++x) {
    const int count = static_cast<int>(members[x].size());
    fg[x] = count > 0 ? 1.0f : 0.0f;
    ninst[std::min(count, 2) * n + x] = 1.0f;
    if (count >= 2) {
      for (int ch = 0; ch < geometry.channels(); ++ch) patch[ch * n + x] = 0.5f;
      continue;
    }
    if (count == 0) continue;
    const Coord c = grid.coord(x);
    for (int ch = 0; ch < geometry.channels(); ++ch) {
      const Coord& d = geometry.offset(ch);
      const Coord y{c[0] + d[0], c[1] + d[1], c[2] + d[2]};
      if (grid.contains(y) && same_instance(x, grid.linear(y))) patch[ch * n + x] = 1.0f;
    }
  }
  return make_bundle(geometry, std::move(patch), std::move(fg), std::move(ninst), t, fg_threshold);
}

PredictionBundle corrupt(const PredictionBundle& bundle, const NoiseSpec& noise) {
  if (!(noise.flip_prob >= 0.0 && noise.flip_prob <= 1.0))
    throw ValidationError("flip_prob must lie in [0, 1]");
  if (!(noise.jitter_sigma >= 0.0)) throw ValidationError("jitter_sigma must be >= 0");
  PredictionBundle out = bundle;
  const CounterRng flips(noise.seed, 1);
  const CounterRng jitter(noise.seed, 2);
  auto& values = out.patch_probs.values();
  for (std::size_t e = 0; e < values.size(); ++e) {
    double v = values[e];
    if (noise.flip_prob > 0.0 && flips.uniform(e) < noise.flip_prob) v = 1.0 - v;
    if (noise.jitter_sigma > 0.0) {
      v = std::clamp(v, kProbabilityFloor, 1.0 - kProbabilityFloor);
      const double logit = std::log(v / (1.0 - v)) + noise.jitter_sigma * jitter.normal(e);
      v = std::clamp(1.0 / (1.0 + std::exp(-logit)), kProbabilityFloor, 1.0 - kProbabilityFloor);
    }
    values[e] = static_cast<float>(v);
  }
  return out;
}

ShapeKind parse_shape_kind(std::string_view name) {
  if (name == "blobs") return ShapeKind::Blobs;
  if (name == "strips") return ShapeKind::Strips;
  if (name == "crossing-strips") return ShapeKind::CrossingStrips;
  throw ValidationError("unknown shape kind '" + std::string(name) + "'");
}

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Blobs: return "blobs";
    case ShapeKind::Strips: return "strips";
    case ShapeKind::CrossingStrips: return "crossing-strips";
  }
  return "?";
}

namespace {

using Point = std::array<double, 2>;

Mask blob(const Grid& grid, Rng& rng, const ShapeParams& p) {
  const Coord& s = grid.shape3();
  const int first = 3 - grid.dims();
  std::array<double, 3> center{0, 0, 0}, radius{0.5, 0.5, 0.5};
  for (int a = first; a < 3; ++a) {
    radius[a] = rng.uniform(p.min_radius, p.max_radius);
    const double lo = std::ceil(radius[a]);
    const double hi = static_cast<double>(s[a]) - 1.0 - lo;
    if (hi < lo) throw ValidationError("blob radius does not fit the image");
    center[a] = rng.uniform(lo, hi);
  }
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double ca = std::cos(angle), sa = std::sin(angle);
  Mask m(grid.size(), 0);
  for (Index i = 0; i < grid.size(); ++i) {
    const Coord c = grid.coord(i);
    double r2 = 0.0;
    if (grid.dims() == 2) {
      const double dy = c[1] - center[1], dx = c[2] - center[2];
      const double u = dx * ca + dy * sa, v = -dx * sa + dy * ca;
      r2 = (u / radius[2]) * (u / radius[2]) + (v / radius[1]) * (v / radius[1]);
    } else {
      for (int a = 0; a < 3; ++a) {
        const double d = (c[a] - center[a]) / radius[a];
        r2 += d * d;
      }
    }
    m[i] = r2 <= 1.0;
  }
  return m;
}

double segment_distance(Point q, Point a, Point b) {
  const double vx = b[0] - a[0], vy = b[1] - a[1];
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((q[0] - a[0]) * vx + (q[1] - a[1]) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = q[0] - (a[0] + t * vx), dy = q[1] - (a[1] + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

Mask thick_polyline(const Grid& grid, const std::vector<Point>& pts, int width) {
  const double r = (width - 1) / 2.0 + 1e-9;
  Mask m(grid.size(), 0);
  for (Index i = 0; i < grid.size(); ++i) {
    const Coord c = grid.coord(i);
    const Point q{static_cast<double>(c[1]), static_cast<double>(c[2])};
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      if (segment_distance(q, pts[k], pts[k + 1]) <= r) {
        m[i] = 1;
        break;
      }
  }
  return m;
}

bool inside(const Grid& grid, Point q, double margin) {
  const Coord& s = grid.shape3();
  return q[0] >= margin && q[1] >= margin && q[0] <= s[1] - 1 - margin &&
         q[1] <= s[2] - 1 - margin;
}

Point step(Point from, double angle, double length) {
  return {from[0] + length * std::sin(angle), from[1] + length * std::cos(angle)};
}

std::vector<Point> random_polyline(const Grid& grid, Rng& rng, const ShapeParams& p) {
  const Coord& s = grid.shape3();
  const double margin = p.strip_width / 2.0;
  std::vector<Point> pts{{rng.uniform(margin, s[1] - 1 - margin), rng.uniform(margin, s[2] - 1 - margin)}};
  double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (int k = 0; k < 2; ++k) {
    pts.push_back(step(pts.back(), angle, rng.uniform(p.min_length, p.max_length) / 2.0));
    angle += rng.uniform(-std::numbers::pi / 4, std::numbers::pi / 4);
  }
  for (const Point& q : pts)
    if (!inside(grid, q, margin)) return {};
  return pts;
}

bool disjoint(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && b[i]) return false;
  return true;
}

bool empty(const Mask& m) { return std::none_of(m.begin(), m.end(), [](auto v) { return v != 0; }); }

GroundTruth crossing_strips(const Grid& grid, Rng& rng, const ShapeParams& p) {
  const Coord& s = grid.shape3();
  const double margin = p.strip_width / 2.0;
  for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
    const Point center{rng.uniform(margin, s[1] - 1 - margin), rng.uniform(margin, s[2] - 1 - margin)};
    const double a1 = rng.uniform(0.0, std::numbers::pi);
    const double sep = rng.uniform(std::numbers::pi / 3, std::numbers::pi / 2);
    const double a2 = a1 + (rng.uniform() < 0.5 ? sep : -sep);
    GroundTruth gt;
    gt.grid = grid;
    bool ok = true;
    for (double angle : {a1, a2}) {
      const double length = rng.uniform(p.min_length, p.max_length);
      const double split = rng.uniform(0.3, 0.7);
      const std::vector<Point> pts{step(center, angle, -split * length),
                                   step(center, angle, (1.0 - split) * length)};
      if (!inside(grid, pts[0], margin) || !inside(grid, pts[1], margin)) ok = false;
      gt.masks.push_back(thick_polyline(grid, pts, p.strip_width));
    }
    if (!ok) continue;
    Coord lo{s[0], s[1], s[2]}, hi{-1, -1, -1};
    for (Index i = 0; i < grid.size(); ++i) {
      if (!(gt.masks[0][i] && gt.masks[1][i])) continue;
      const Coord c = grid.coord(i);
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], c[a]);
        hi[a] = std::max(hi[a], c[a]);
      }
    }
    if (hi[2] < 0) continue;
    bool narrow = true;
    for (int a = 0; a < 3; ++a) narrow = narrow && hi[a] - lo[a] + 1 < p.max_overlap_extent;
    if (narrow) return gt;
  }
  throw PlacementFailure("could not place two crossing strips");
}

}  // namespace

GroundTruth make_shapes(ShapeKind kind, const ShapeParams& p, std::uint64_t seed) {
  const Grid grid(p.shape);
  if (p.min_count < 1 || p.max_count < p.min_count) throw ValidationError("invalid instance count range");
  if (kind != ShapeKind::Blobs && grid.dims() != 2)
    throw ValidationError("strip shapes are two-dimensional only");
  Rng rng(seed, 0);
  if (kind == ShapeKind::CrossingStrips) return crossing_strips(grid, rng, p);

  GroundTruth gt;
  gt.grid = grid;
  const auto count = rng.integer(p.min_count, p.max_count);
  Mask occupied(grid.size(), 0);
  for (std::int64_t k = 0; k < count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < p.max_attempts && !placed; ++attempt) {
      Mask m = kind == ShapeKind::Blobs ? blob(grid, rng, p)
                                        : thick_polyline(grid, random_polyline(grid, rng, p), p.strip_width);
      if (empty(m) || !disjoint(m, occupied)) continue;
      if (kind == ShapeKind::Strips &&
          static_cast<std::size_t>(std::count(m.begin(), m.end(), 1)) < static_cast<std::size_t>(p.strip_width * p.min_length / 2))
        continue;
      for (std::size_t i = 0; i < m.size(); ++i) occupied[i] |= m[i];
      gt.masks.push_back(std::move(m));
      placed = true;
    }
    if (!placed)
      throw PlacementFailure("could not place instance " + std::to_string(k + 1) + " of " +
                             std::to_string(count));
  }
  return gt;
}

}  // namespace patchasm
