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

#include <string>
#include <vector>

#include "patchasm/core.hpp"

namespace patchasm {

/// |a ∩ b| / |a ∪ b|, 0 for an empty union.
double iou(const Mask& a, const Mask& b);

/// iou_matrix[p][g] for predicted mask p and ground-truth mask g.
using IouMatrix = std::vector<std::vector<double>>;
IouMatrix iou_matrix(const std::vector<Mask>& pred, const std::vector<Mask>& gt);

struct MatchCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  /// tp / (tp + fp + fn); 1 when there is nothing to match on either side.
  double ap = 1.0;

  bool operator==(const MatchCounts&) const = default;
};

/// One-to-one matching of pairs with IoU > threshold, greedily by descending
/// IoU (ties: lower ground-truth index, then lower prediction index).
MatchCounts match_greedy(const IouMatrix& ious, std::size_t gt_count, double threshold);

MatchCounts ap_dsb(const std::vector<Mask>& pred, const std::vector<Mask>& gt, double threshold);

double av_ap(const std::vector<Mask>& pred, const std::vector<Mask>& gt,
             const std::vector<double>& thresholds);

/// [0.5:0.05:0.95] and [0.5:0.1:0.9].
std::vector<double> thresholds_fine();
std::vector<double> thresholds_coarse();
/// Parses "start:step:stop" (inclusive) or a preset name ("fine", "coarse").
std::vector<double> parse_threshold_grid(const std::string& spec);

struct ThresholdRow {
  double threshold = 0.0;
  MatchCounts counts;
};

struct EvalReport {
  std::vector<ThresholdRow> rows;
  double avap = 0.0;
  /// Best IoU of each ground-truth instance against any prediction.
  std::vector<double> gt_best_iou;
  std::size_t gt_count = 0;
  std::size_t pred_count = 0;
};

EvalReport evaluate(const std::vector<Mask>& pred, const std::vector<Mask>& gt,
                    const std::vector<double>& thresholds);

std::string to_tsv(const EvalReport& report);
std::string to_json(const EvalReport& report);

}  // namespace patchasm
