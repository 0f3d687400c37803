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

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "patchasm/consensus.hpp"
#include "patchasm/core.hpp"
#include "patchasm/oracle.hpp"
#include "patchasm/selection.hpp"

namespace patchasm::testing {

/// A 1 x n image with the three-pixel patch {-1, 0, +1}. `patches[x]` holds
/// p_x in channel order; pixels not listed get an all-zero patch. Foreground
/// probabilities are 1 for pixels listed in `fg`.
inline PredictionBundle line_bundle(Index n, const std::map<Index, std::vector<float>>& patches,
                                    const std::vector<Index>& fg, double t) {
  const PatchGeometry g({1, 3});
  std::vector<float> pp(3 * n, 0.0f);
  for (const auto& [x, p] : patches)
    for (int c = 0; c < 3; ++c) pp[c * n + x] = p[c];
  std::vector<float> fp(n, 0.0f);
  for (Index x : fg) fp[x] = 1.0f;
  const std::size_t un = static_cast<std::size_t>(n);
  return make_bundle(g, Tensor<float>({3, 1, un}, pp), Tensor<float>({1, un}, fp), std::nullopt, t);
}

/// Random probabilities with a mix of exact 0/1, threshold-adjacent and
/// generic values, so every class and boundary case occurs.
inline float random_prob(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.2) return 0.0f;
  if (u < 0.4) return 1.0f;
  if (u < 0.45) return 0.5f;
  return static_cast<float>(rng.uniform());
}

inline PredictionBundle random_bundle(Rng& rng, std::vector<Index> shape, std::vector<int> patch,
                                      double t, double fg_fraction, bool with_overlap) {
  const PatchGeometry g(patch);
  const Grid grid{std::span<const Index>(shape)};
  const Index n = grid.size();
  std::vector<std::size_t> spatial(shape.begin(), shape.end());
  std::vector<std::size_t> pshape = spatial;
  pshape.insert(pshape.begin(), static_cast<std::size_t>(g.channels()));
  std::vector<float> pp(static_cast<std::size_t>(g.channels() * n));
  for (auto& v : pp) v = random_prob(rng);
  std::vector<float> fp(n);
  for (auto& v : fp) v = rng.uniform() < fg_fraction ? 0.9f : 0.1f;
  std::optional<Tensor<float>> ninst;
  if (with_overlap) {
    std::vector<float> np(3 * n, 0.0f);
    for (Index i = 0; i < n; ++i) np[(rng.uniform() < 0.1 ? 2 : 1) * n + i] = 1.0f;
    auto nshape = spatial;
    nshape.insert(nshape.begin(), 3);
    ninst = Tensor<float>(nshape, np);
  }
  return make_bundle(g, Tensor<float>(pshape, pp), Tensor<float>(spatial, fp), ninst, t);
}

/// Independent evaluation of the consensus for one pixel pair by scanning
/// every predicting pixel. Returns (numerator, count).
inline std::pair<double, int> brute_pair(const PredictionBundle& b, const PixelSet& fg,
                                         const PixelSet& discard, bool sparse, Index y, Index z) {
  const Grid& grid = b.grid;
  const PatchGeometry& g = b.geometry;
  double num = 0.0;
  int count = 0;
  if (discard.mask[y] || discard.mask[z]) return {0.0, 0};
  if (sparse && (!fg.mask[y] || !fg.mask[z])) return {0.0, 0};
  const Coord cy = grid.coord(y), cz = grid.coord(z);
  for (Index x = 0; x < grid.size(); ++x) {
    if (discard.mask[x]) continue;
    if (sparse && !fg.mask[x]) continue;
    const Coord cx = grid.coord(x);
    const int chy = g.channel_of({cy[0] - cx[0], cy[1] - cx[1], cy[2] - cx[2]});
    const int chz = g.channel_of({cz[0] - cx[0], cz[1] - cx[1], cz[2] - cx[2]});
    if (chy < 0 || chz < 0) continue;
    const double py = b.prob(x, chy), pz = b.prob(x, chz);
    const PixelClass ky = classify_value(py, b.t), kz = classify_value(pz, b.t);
    if (ky != PixelClass::Foreground && kz != PixelClass::Foreground) continue;
    ++count;
    if (ky == PixelClass::Foreground && kz == PixelClass::Foreground) num += py * pz;
    else if (ky == PixelClass::Foreground && kz == PixelClass::Background) num -= py * (1.0 - pz);
    else if (kz == PixelClass::Foreground && ky == PixelClass::Background) num -= pz * (1.0 - py);
  }
  return {num, count};
}

inline std::optional<double> brute_aff(const PredictionBundle& b, const PixelSet& fg,
                                       const PixelSet& discard, bool sparse, Index y, Index z) {
  const auto [num, count] = brute_pair(b, fg, discard, sparse, y, z);
  if (count == 0) return std::nullopt;
  return num / count;
}

/// Pixels of patch x inside the image (and the domain when sparse) with their
/// class and probability, by direct coordinate arithmetic.
struct BrutePixel {
  Index pixel;
  PixelClass cls;
  float prob;
};

inline std::vector<BrutePixel> brute_window(const PredictionBundle& b, const Mask* domain, Index x) {
  std::vector<BrutePixel> out;
  const Coord cx = b.grid.coord(x);
  for (int ch = 0; ch < b.geometry.channels(); ++ch) {
    const Coord d = b.geometry.offset(ch);
    const Coord q{cx[0] + d[0], cx[1] + d[1], cx[2] + d[2]};
    if (!b.grid.contains(q)) continue;
    const Index qi = b.grid.linear(q);
    if (domain && !(*domain)[qi]) continue;
    out.push_back({qi, classify_value(b.prob(x, ch), b.t), b.prob(x, ch)});
  }
  return out;
}

/// Patch score straight from its definition, with affinities supplied by `aff`.
template <class Aff>
double brute_score(const PredictionBundle& b, const Mask* domain, Index x, Aff&& aff) {
  const auto win = brute_window(b, domain, x);
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < win.size(); ++i)
    for (std::size_t j = i + 1; j < win.size(); ++j) {
      const PixelClass ci = win[i].cls, cj = win[j].cls;
      if (ci != PixelClass::Foreground && cj != PixelClass::Foreground) continue;
      ++pairs;
      const std::optional<double> a = aff(win[i].pixel, win[j].pixel);
      if (!a) continue;
      if (ci == PixelClass::Foreground && cj == PixelClass::Foreground) sum += *a;
      else if (ci == PixelClass::Background || cj == PixelClass::Background) sum -= *a;
    }
  return pairs == 0 ? 0.0 : sum / pairs;
}

inline std::vector<Index> brute_fg(const PredictionBundle& b, const Mask* domain, Index x) {
  std::vector<Index> out;
  for (const auto& p : brute_window(b, domain, x))
    if (p.cls == PixelClass::Foreground) out.push_back(p.pixel);
  std::sort(out.begin(), out.end());
  return out;
}

/// Mean defined affinity over fg(a) x fg(b).
template <class Aff>
std::optional<double> brute_paff(const PredictionBundle& b, const Mask* domain, Index pa, Index pb,
                                 Aff&& aff) {
  double sum = 0.0;
  int n = 0;
  for (Index v : brute_fg(b, domain, pa))
    for (Index w : brute_fg(b, domain, pb)) {
      const auto a = aff(v, w);
      if (!a) continue;
      sum += *a;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

inline GroundTruth masks_from_labels(const Grid& grid, const std::vector<int>& labels, int count) {
  GroundTruth gt;
  gt.grid = grid;
  gt.masks.assign(count, Mask(grid.size(), 0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 0) gt.masks[labels[i] - 1][i] = 1;
  return gt;
}

}  // namespace patchasm::testing
