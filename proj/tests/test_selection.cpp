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

#include <gtest/gtest.h>

#include <set>

#include "patchasm/selection.hpp"
#include "support.hpp"

namespace patchasm {
namespace {

using testing::line_bundle;

PixelSet none(Index n) { return PixelSet::from_mask(Mask(n, 0)); }
PixelSet only(Index n, std::vector<Index> px) {
  Mask m(n, 0);
  for (Index p : px) m[p] = 1;
  return PixelSet::from_mask(std::move(m));
}

std::vector<Index> pixels_of(const PatchSelection& s) {
  std::vector<Index> out;
  for (const auto& p : s.patches) out.push_back(p.pixel);
  return out;
}

TEST(ScorePatch, SinglePerfectPatch) {
  const auto b = line_bundle(5, {{2, {1, 1, 0}}}, {2}, 0.5);
  const auto field = accumulate(b, only(5, {2}), none(5), {.sparse = false, .threads = 1});
  EXPECT_DOUBLE_EQ(score_patch(field, b, 2), 1.0);
}

TEST(ScorePatch, MaximalDisagreement) {
  const auto consensus = line_bundle(2, {{0, {0, 1, 0}}}, {0}, 0.5);
  const auto field = accumulate(consensus, only(2, {0}), none(2), {.sparse = false, .threads = 1});
  ASSERT_DOUBLE_EQ(*field.aff(0, 1), -1.0);
  const auto other = line_bundle(2, {{0, {0, 1, 1}}}, {0}, 0.5);
  EXPECT_DOUBLE_EQ(score_patch(field, other, 0), -1.0);
}

TEST(ScorePatch, UndefinedPairsCountInNormalizer) {
  // Consensus only knows pairs inside {0, 1, 2}; aff(1, 2) = -1.
  const auto consensus = line_bundle(5, {{1, {1, 1, 0}}}, {1}, 0.9);
  const auto field = accumulate(consensus, only(5, {1}), none(5), {.sparse = false, .threads = 1});
  ASSERT_DOUBLE_EQ(*field.aff(1, 2), -1.0);
  ASSERT_FALSE(field.aff(1, 3));
  ASSERT_FALSE(field.aff(2, 3));
  // Scored patch: 1 and 2 foreground, 3 background. Only (1, 2) is defined.
  const auto scored = line_bundle(5, {{2, {1, 1, 0}}}, {2}, 0.9);
  EXPECT_NEAR(score_patch(field, scored, 2), -1.0 / 3.0, 1e-12);
}

TEST(ScorePatch, EmptyForegroundSignals) {
  const auto b = line_bundle(5, {{2, {0, 0.5f, 0}}}, {2}, 0.9);
  const auto field = accumulate(b, only(5, {2}), none(5), {.sparse = false, .threads = 1});
  EXPECT_THROW(score_patch(field, b, 2), EmptyForeground);
}

TEST(ScorePatch, MatchesBruteForceAndBounded) {
  Rng rng(8, 8);
  for (int trial = 0; trial < 4; ++trial) {
    const auto b = testing::random_bundle(rng, {9, 10}, {5, 3}, 0.6 + 0.1 * trial, 0.7, trial % 2 == 1);
    const PixelSet fg = image_foreground(b);
    const PixelSet discard = overlap_mask(b);
    for (bool sparse : {false, true}) {
      const auto field = accumulate(b, fg, discard, {.sparse = sparse, .threads = 1});
      const Mask* domain = sparse ? &fg.mask : nullptr;
      const auto ranked = rank(field, b, fg, discard, 1);
      for (const ScoredPatch& p : ranked) {
        const double expect = testing::brute_score(b, domain, p.pixel, [&](Index y, Index z) {
          return testing::brute_aff(b, fg, discard, sparse, y, z);
        });
        EXPECT_NEAR(p.score, expect, 1e-12);
        EXPECT_GE(p.score, -1.0);
        EXPECT_LE(p.score, 1.0);
        EXPECT_EQ(static_cast<std::size_t>(p.fg_size), testing::brute_fg(b, domain, p.pixel).size());
      }
    }
  }
}

TEST(Rank, OrderAndTieBreaks) {
  std::vector<ScoredPatch> v{{5, 0.4, 3}, {9, 0.9, 3}, {7, 0.5, 12}, {3, 0.5, 30}, {20, 0.5, 30}};
  std::sort(v.begin(), v.end(), ranks_before);
  EXPECT_EQ(v[0].pixel, 9);
  EXPECT_EQ(v[1].pixel, 3);
  EXPECT_EQ(v[2].pixel, 20);
  EXPECT_EQ(v[3].pixel, 7);
  EXPECT_EQ(v[4].pixel, 5);
}

TEST(Rank, EveryEligiblePatchOnce) {
  Rng rng(2, 9);
  const auto b = testing::random_bundle(rng, {12, 11}, {3, 3}, 0.7, 0.6, true);
  const PixelSet fg = image_foreground(b);
  const PixelSet discard = overlap_mask(b);
  const auto field = accumulate(b, fg, discard, {.sparse = true, .threads = 1});
  const auto ranked = rank(field, b, fg, discard, 1);
  std::set<Index> seen;
  for (const auto& p : ranked) {
    EXPECT_TRUE(seen.insert(p.pixel).second);
    EXPECT_TRUE(fg.contains(p.pixel));
    EXPECT_FALSE(discard.contains(p.pixel));
    EXPECT_GE(p.fg_size, 1);
  }
  for (Index x : fg.pixels)
    if (!discard.contains(x) && !testing::brute_fg(b, &fg.mask, x).empty()) { EXPECT_TRUE(seen.contains(x)); }
  EXPECT_TRUE(std::is_sorted(ranked.begin(), ranked.end(), ranks_before));
  EXPECT_EQ(rank(field, b, fg, discard, 3), ranked);
}

TEST(Rank, PerfectInputScoresOne) {
  ShapeParams params;
  params.shape = {48, 48};
  const GroundTruth gt = make_shapes(ShapeKind::Blobs, params, 4);
  const auto b = synth(gt, PatchGeometry({7, 7}));
  const PixelSet fg = image_foreground(b);
  const auto field = accumulate(b, fg, overlap_mask(b), {.sparse = true, .threads = 1});
  const auto ranked = rank(field, b, fg, overlap_mask(b), 1);
  ASSERT_EQ(ranked.size(), fg.count());
  for (const auto& p : ranked) { EXPECT_NEAR(p.score, 1.0, 1e-9); }
}

// Line of 6 pixels. A at 1 covers {1,2}, B at 2 covers {1,2}, C at 3 covers {3}.
struct CoverFixture {
  PredictionBundle b = line_bundle(6, {{1, {0, 1, 1}}, {2, {1, 1, 0}}, {3, {0, 1, 0}}}, {1, 2, 3}, 0.5);
  PatchForeground fg_of{b, nullptr};
  PixelSet fg = only(6, {1, 2, 3});
};

TEST(GreedyCover, SkipsPatchesWithoutNewCoverage) {
  CoverFixture f;
  const std::vector<ScoredPatch> ranked{{1, 0.9, 2}, {2, 0.8, 2}, {3, 0.7, 1}};
  const auto sel = greedy_cover(ranked, f.fg_of, f.fg, none(6));
  EXPECT_EQ(pixels_of(sel), std::vector<Index>({1, 3}));
  EXPECT_TRUE(sel.uncovered.empty());
}

TEST(GreedyCover, SinglePatchCover) {
  CoverFixture f;
  const auto fg = only(6, {1, 2});
  const auto sel = greedy_cover({{2, 1.0, 2}, {1, 0.9, 2}, {3, 0.7, 1}}, f.fg_of, fg, none(6));
  EXPECT_EQ(pixels_of(sel), std::vector<Index>({2}));
}

TEST(GreedyCover, EmptyForeground) {
  CoverFixture f;
  const auto sel = greedy_cover({}, f.fg_of, none(6), none(6));
  EXPECT_TRUE(sel.patches.empty());
  EXPECT_TRUE(sel.uncovered.empty());
}

TEST(GreedyCover, ReportsUncoverable) {
  CoverFixture f;
  const auto fg = only(6, {1, 2, 3, 5});
  const auto sel = greedy_cover({{1, 0.9, 2}, {3, 0.7, 1}}, f.fg_of, fg, none(6));
  EXPECT_EQ(sel.uncovered, std::vector<Index>({5}));
}

TEST(ThinOut, DropsRedundantPatch) {
  // A at 2 covers {1,2,3}, B at 1 covers {2}, C at 4 covers {4}.
  const auto b = line_bundle(6, {{2, {1, 1, 1}}, {1, {0, 0, 1}}, {4, {0, 1, 0}}}, {1, 2, 3, 4}, 0.5);
  const PatchForeground fg_of(b, nullptr);
  const auto fg = only(6, {1, 2, 3, 4});
  PatchSelection pre = greedy_cover({{1, 0.95, 1}, {2, 0.9, 3}, {4, 0.8, 1}}, fg_of, fg, none(6));
  ASSERT_EQ(pixels_of(pre), std::vector<Index>({1, 2, 4}));
  const auto thin = thin_out(pre, fg_of, fg, none(6));
  std::vector<Index> kept = pixels_of(thin);
  std::sort(kept.begin(), kept.end());
  EXPECT_EQ(kept, std::vector<Index>({2, 4}));
  EXPECT_EQ(thin.coverage, pre.coverage);
}

TEST(ThinOut, MinimalSelectionUnchanged) {
  CoverFixture f;
  const auto pre = greedy_cover({{1, 0.9, 2}, {3, 0.7, 1}}, f.fg_of, f.fg, none(6));
  const auto thin = thin_out(pre, f.fg_of, f.fg, none(6));
  EXPECT_EQ(thin.patches, pre.patches);
}

// Plain greedy max-coverage with the documented tie-breaks, rescanning all
// candidates every round.
std::vector<Index> plain_thin_out(const PatchSelection& pre, const PatchForeground& fg_of, const Mask& target) {
  Mask covered(target.size(), 0);
  std::vector<bool> used(pre.patches.size(), false);
  std::vector<Index> out;
  while (true) {
    int best = -1;
    std::size_t best_gain = 0;
    for (std::size_t i = 0; i < pre.patches.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = 0;
      for (Index y : fg_of(pre.patches[i].pixel)) gain += target[y] && !covered[y];
      if (gain == 0) continue;
      const auto& p = pre.patches[i];
      bool better = best < 0 || gain > best_gain;
      if (!better && gain == best_gain) {
        const auto& q = pre.patches[best];
        better = p.score != q.score ? p.score > q.score : p.pixel < q.pixel;
      }
      if (better) {
        best = static_cast<int>(i);
        best_gain = gain;
      }
    }
    if (best < 0) break;
    used[best] = true;
    out.push_back(pre.patches[best].pixel);
    for (Index y : fg_of(pre.patches[best].pixel))
      if (target[y]) covered[y] = 1;
  }
  return out;
}

TEST(ThinOut, PropertiesOnRandomInputs) {
  Rng rng(31, 2);
  for (int trial = 0; trial < 12; ++trial) {
    const auto b = testing::random_bundle(rng, {14, 13}, {5, 5}, 0.6, 0.6, trial % 2 == 0);
    const PixelSet fg = image_foreground(b);
    const PixelSet discard = overlap_mask(b);
    const auto field = accumulate(b, fg, discard, {.sparse = true, .threads = 1});
    const PatchForeground fg_of(b, field.domain());
    const auto ranked = rank(field, b, fg, discard, 1);
    const auto pre = greedy_cover(ranked, fg_of, fg, discard);
    const auto thin = thin_out(pre, fg_of, fg, discard);
    EXPECT_EQ(thin.coverage, pre.coverage);
    EXPECT_EQ(thin.uncovered, pre.uncovered);
    EXPECT_LE(thin.size(), pre.size());
    std::set<Index> pre_set;
    for (const auto& p : pre.patches) pre_set.insert(p.pixel);
    std::set<Index> ranked_set;
    for (const auto& p : ranked) ranked_set.insert(p.pixel);
    for (Index x : pre_set) { EXPECT_TRUE(ranked_set.contains(x)); }
    std::set<Index> thin_set;
    for (const auto& p : thin.patches) {
      EXPECT_TRUE(pre_set.contains(p.pixel));
      EXPECT_TRUE(thin_set.insert(p.pixel).second);
    }
    Mask target(fg.mask.size(), 0);
    for (Index x : fg.pixels) target[x] = !discard.contains(x);
    EXPECT_EQ(pixels_of(thin), plain_thin_out(pre, fg_of, target));
    // Every coverable target pixel is covered.
    Mask coverable(target.size(), 0);
    for (const auto& p : ranked)
      for (Index y : fg_of(p.pixel)) coverable[y] = 1;
    for (std::size_t i = 0; i < target.size(); ++i)
      if (target[i] && coverable[i]) { EXPECT_TRUE(pre.coverage[i]); }
  }
}

}  // namespace
}  // namespace patchasm
