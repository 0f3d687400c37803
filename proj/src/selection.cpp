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

#include "patchasm/selection.hpp"

#include <algorithm>
#include <queue>

#include "patchasm/parallel.hpp"

namespace patchasm {

namespace {

struct ScoreResult {
  double score = 0.0;
  int fg_size = 0;
};

ScoreResult score_window(const ConsensusField& field, const PairTable& table,
                         const PatchWindow& win) {
  ScoreResult r;
  const std::size_t w = win.size();
  double sum = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < w; ++i) {
    if (win.cls[i] != PixelClass::Foreground) continue;
    ++r.fg_size;
    const int ci = win.channel[i];
    const Index yi = win.pixel[i];
    for (std::size_t j = 0; j < w; ++j) {
      if (j == i) continue;
      const PixelClass cj = win.cls[j];
      if (cj == PixelClass::Foreground && j < i) continue;
      ++pairs;
      if (cj == PixelClass::Uncertain) continue;
      const std::int32_t code = table.code(ci, win.channel[j]);
      const Index s = field.slot((code & 1) ? yi : win.pixel[j]);
      if (s < 0) continue;
      const auto a = field.entry(s, code >> 1);
      if (!a) continue;
      sum += cj == PixelClass::Foreground ? *a : -*a;
    }
  }
  r.score = pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
  return r;
}

}  // namespace

double score_patch(const ConsensusField& field, const PredictionBundle& bundle, Index x) {
  PatchWindow win;
  gather_window(bundle, x, field.domain(), nullptr, win);
  const PairTable table(bundle.geometry);
  const ScoreResult r = score_window(field, table, win);
  if (r.fg_size == 0) throw EmptyForeground("patch has an empty foreground");
  return r.score;
}

std::vector<ScoredPatch> rank(const ConsensusField& field, const PredictionBundle& bundle,
                              const PixelSet& foreground, const PixelSet& discard, int threads) {
  std::vector<Index> candidates;
  for (Index x : foreground.pixels)
    if (!discard.mask[x]) candidates.push_back(x);
  const PairTable table(bundle.geometry);
  std::vector<ScoredPatch> scored(candidates.size());
  parallel_for(static_cast<Index>(candidates.size()), threads, [&](Index begin, Index end, int) {
    PatchWindow win;
    for (Index k = begin; k < end; ++k) {
      gather_window(bundle, candidates[k], field.domain(), nullptr, win);
      const ScoreResult r = score_window(field, table, win);
      scored[k] = {candidates[k], r.score, r.fg_size};
    }
  });
  std::erase_if(scored, [](const ScoredPatch& p) { return p.fg_size == 0; });
  std::sort(scored.begin(), scored.end(), ranks_before);
  return scored;
}

namespace {

Mask cover_target(const PixelSet& foreground, const PixelSet& discard) {
  Mask target(foreground.mask.size(), 0);
  for (Index x : foreground.pixels) target[x] = !discard.mask[x];
  return target;
}

void fill_uncovered(PatchSelection& sel, const Mask& target) {
  sel.uncovered.clear();
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target[i] && !sel.coverage[i]) sel.uncovered.push_back(static_cast<Index>(i));
}

}  // namespace

PatchSelection greedy_cover(const std::vector<ScoredPatch>& ranked, const PatchForeground& fg_of,
                            const PixelSet& foreground, const PixelSet& discard) {
  const Mask target = cover_target(foreground, discard);
  PatchSelection sel;
  sel.coverage.assign(target.size(), 0);
  std::size_t remaining = std::count(target.begin(), target.end(), 1);
  std::vector<Index> fg;
  for (const ScoredPatch& p : ranked) {
    if (remaining == 0) break;
    fg_of.collect(p.pixel, fg);
    bool useful = false;
    for (Index y : fg) {
      if (target[y] && !sel.coverage[y]) {
        sel.coverage[y] = 1;
        --remaining;
        useful = true;
      }
    }
    if (useful) sel.patches.push_back(p);
  }
  fill_uncovered(sel, target);
  return sel;
}

PatchSelection thin_out(const PatchSelection& pre, const PatchForeground& fg_of,
                        const PixelSet& foreground, const PixelSet& discard) {
  const Mask target = cover_target(foreground, discard);
  const std::size_t k = pre.patches.size();
  std::vector<std::vector<Index>> footprint(k);
  for (std::size_t i = 0; i < k; ++i) {
    fg_of.collect(pre.patches[i].pixel, footprint[i]);
    std::erase_if(footprint[i], [&](Index y) { return !target[y]; });
  }

  PatchSelection sel;
  sel.coverage.assign(target.size(), 0);

  // Lazy greedy: stored gains only shrink, so a popped entry whose recomputed
  // gain is unchanged still dominates every other entry under the full key.
  struct Item {
    std::size_t gain;
    std::size_t index;
  };
  auto worse = [&](const Item& a, const Item& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    const ScoredPatch& pa = pre.patches[a.index];
    const ScoredPatch& pb = pre.patches[b.index];
    if (pa.score != pb.score) return pa.score < pb.score;
    return pa.pixel > pb.pixel;
  };
  std::priority_queue<Item, std::vector<Item>, decltype(worse)> heap(worse);
  for (std::size_t i = 0; i < k; ++i) heap.push({footprint[i].size(), i});

  while (!heap.empty()) {
    Item top = heap.top();
    heap.pop();
    std::size_t gain = 0;
    for (Index y : footprint[top.index]) gain += !sel.coverage[y];
    if (gain == 0) continue;
    if (gain < top.gain) {
      heap.push({gain, top.index});
      continue;
    }
    for (Index y : footprint[top.index]) sel.coverage[y] = 1;
    sel.patches.push_back(pre.patches[top.index]);
  }
  fill_uncovered(sel, target);
  return sel;
}

}  // namespace patchasm
