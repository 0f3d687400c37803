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

#include "patchasm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace patchasm {

double iou(const Mask& a, const Mask& b) {
  if (a.size() != b.size()) throw ValidationError("iou: mask shapes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] != 0, y = b[i] != 0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

IouMatrix iou_matrix(const std::vector<Mask>& pred, const std::vector<Mask>& gt) {
  std::size_t n = 0;
  for (const auto* set : {&pred, &gt})
    for (const Mask& m : *set) {
      if (n == 0) n = m.size();
      if (m.size() != n) throw ValidationError("instance masks have different shapes");
    }
  auto pixels_of = [](const Mask& m) {
    std::vector<std::size_t> px;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i]) px.push_back(i);
    return px;
  };
  std::vector<std::size_t> gt_size(gt.size());
  for (std::size_t g = 0; g < gt.size(); ++g) gt_size[g] = std::count(gt[g].begin(), gt[g].end(), 1);
  IouMatrix out(pred.size(), std::vector<double>(gt.size(), 0.0));
  for (std::size_t p = 0; p < pred.size(); ++p) {
    const auto px = pixels_of(pred[p]);
    for (std::size_t g = 0; g < gt.size(); ++g) {
      std::size_t inter = 0;
      for (std::size_t q : px) inter += gt[g][q] != 0;
      const std::size_t uni = px.size() + gt_size[g] - inter;
      out[p][g] = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
  }
  return out;
}

MatchCounts match_greedy(const IouMatrix& ious, std::size_t gt_count, double threshold) {
  struct Candidate {
    double iou;
    std::size_t g, p;
  };
  std::vector<Candidate> cands;
  for (std::size_t p = 0; p < ious.size(); ++p)
    for (std::size_t g = 0; g < gt_count; ++g)
      if (ious[p][g] > threshold) cands.push_back({ious[p][g], g, p});
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.iou, a.g, a.p) < std::tie(a.iou, b.g, b.p);
  });
  std::vector<bool> gt_used(gt_count, false), pred_used(ious.size(), false);
  MatchCounts c;
  for (const Candidate& k : cands) {
    if (gt_used[k.g] || pred_used[k.p]) continue;
    gt_used[k.g] = pred_used[k.p] = true;
    ++c.tp;
  }
  c.fn = static_cast<int>(gt_count) - c.tp;
  c.fp = static_cast<int>(ious.size()) - c.tp;
  const int denom = c.tp + c.fp + c.fn;
  c.ap = denom == 0 ? 1.0 : static_cast<double>(c.tp) / denom;
  return c;
}

MatchCounts ap_dsb(const std::vector<Mask>& pred, const std::vector<Mask>& gt, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("IoU threshold must lie in (0, 1)");
  return match_greedy(iou_matrix(pred, gt), gt.size(), threshold);
}

double av_ap(const std::vector<Mask>& pred, const std::vector<Mask>& gt,
             const std::vector<double>& thresholds) {
  return evaluate(pred, gt, thresholds).avap;
}

namespace {

std::vector<double> grid_of(int start, int step, int stop, double scale) {
  std::vector<double> out;
  for (int v = start; v <= stop; v += step) out.push_back(v / scale);
  return out;
}

}  // namespace

std::vector<double> thresholds_fine() { return grid_of(50, 5, 95, 100.0); }
std::vector<double> thresholds_coarse() { return grid_of(5, 1, 9, 10.0); }

std::vector<double> parse_threshold_grid(const std::string& spec) {
  if (spec == "fine") return thresholds_fine();
  if (spec == "coarse") return thresholds_coarse();
  double start = 0, step = 0, stop = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  std::string rest;
  if (!(in >> start >> c1 >> step >> c2 >> stop) || c1 != ':' || c2 != ':' || (in >> rest) ||
      !(step > 0.0) || stop < start)
    throw ValidationError("threshold grid must be 'start:step:stop', 'fine' or 'coarse'");
  std::vector<double> out;
  const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  for (int k = 0; k <= n; ++k) out.push_back(std::round((start + k * step) * 1e9) / 1e9);
  return out;
}

EvalReport evaluate(const std::vector<Mask>& pred, const std::vector<Mask>& gt,
                    const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw ValidationError("threshold list is empty");
  for (double t : thresholds)
    if (!(t > 0.0 && t < 1.0)) throw ValidationError("IoU threshold must lie in (0, 1)");
  const IouMatrix ious = iou_matrix(pred, gt);
  EvalReport r;
  r.gt_count = gt.size();
  r.pred_count = pred.size();
  double sum = 0.0;
  for (double t : thresholds) {
    r.rows.push_back({t, match_greedy(ious, gt.size(), t)});
    sum += r.rows.back().counts.ap;
  }
  r.avap = sum / static_cast<double>(thresholds.size());
  r.gt_best_iou.assign(gt.size(), 0.0);
  for (const auto& row : ious)
    for (std::size_t g = 0; g < gt.size(); ++g) r.gt_best_iou[g] = std::max(r.gt_best_iou[g], row[g]);
  return r;
}

std::string to_tsv(const EvalReport& r) {
  std::ostringstream out;
  char buf[160];
  out << "threshold\ttp\tfp\tfn\tap\n";
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%.2f\t%d\t%d\t%d\t%.6f\n", row.threshold, row.counts.tp,
                  row.counts.fp, row.counts.fn, row.counts.ap);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "avap\t\t\t\t%.6f\n", r.avap);
  out << buf;
  return out.str();
}

std::string to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows)
    j["rows"].push_back({{"threshold", row.threshold},
                         {"tp", row.counts.tp},
                         {"fp", row.counts.fp},
                         {"fn", row.counts.fn},
                         {"ap", row.counts.ap}});
  j["avap"] = r.avap;
  j["gt_instances"] = r.gt_count;
  j["pred_instances"] = r.pred_count;
  j["gt_best_iou"] = r.gt_best_iou;
  return j.dump(2) + "\n";
}

}  // namespace patchasm
