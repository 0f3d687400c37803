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

#include "patchasm/pipeline.hpp"

#include <chrono>
#include <limits>

#include "patchasm/io.hpp"
#include "patchasm/partition.hpp"

namespace patchasm {

double PipelineResult::total_seconds() const {
  double s = 0.0;
  for (const auto& t : timings) s += t.seconds;
  return s;
}

std::int64_t PipelineResult::count(const std::string& name) const {
  for (const auto& [k, v] : counts)
    if (k == name) return v;
  return -1;
}

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out), start_(Clock::now()) {}
  void lap(std::string stage) {
    const auto now = Clock::now();
    out_.push_back({std::move(stage), std::chrono::duration<double>(now - start_).count()});
    start_ = now;
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::vector<StageTiming>& out_;
  Clock::time_point start_;
};

std::int64_t positive_edges(const SignedGraph& g) {
  std::int64_t n = 0;
  for (const Edge& e : g.edges) n += e.weight > 0.0;
  return n;
}

}  // namespace

PipelineResult run_pipeline(const PredictionBundle& bundle, const PipelineConfig& config) {
  validate(config);
  PipelineResult r;
  StageClock clock(r.timings);
  auto& counts = r.counts;

  const PixelSet fg = image_foreground(bundle);
  const PixelSet discard = overlap_mask(bundle);
  counts.emplace_back("foreground_pixels", static_cast<std::int64_t>(fg.count()));
  counts.emplace_back("discard_pixels", static_cast<std::int64_t>(discard.count()));
  clock.lap("foreground");

  if (config.mws_dense) {
    const DensePartition dense = mws_dense(bundle, fg);
    clock.lap("mws_dense");
    r.segmentation = from_dense_partition(bundle.grid, dense);
    if (config.min_instance_size > 0)
      r.segmentation = filter_small(r.segmentation, static_cast<std::size_t>(config.min_instance_size));
    clock.lap("assemble");
    counts.emplace_back("instances", static_cast<std::int64_t>(r.segmentation.size()));
    return r;
  }

  r.field = accumulate(bundle, fg, discard, {config.sparse, config.threads});
  const ConsensusField& field = *r.field;
  counts.emplace_back("consensus_entries", static_cast<std::int64_t>(field.entries()));
  clock.lap("consensus");

  const PatchForeground fg_of(bundle, field.domain());
  r.ranked = rank(field, bundle, fg, discard, config.threads);
  counts.emplace_back("scored_patches", static_cast<std::int64_t>(r.ranked.size()));
  clock.lap("score");

  PatchSelection selection = greedy_cover(r.ranked, fg_of, fg, discard);
  counts.emplace_back("preselected_patches", static_cast<std::int64_t>(selection.size()));
  clock.lap("greedy_cover");
  if (config.thin_out) {
    selection = thin_out(selection, fg_of, fg, discard);
    clock.lap("thin_out");
  }
  counts.emplace_back("thinned_patches", static_cast<std::int64_t>(selection.size()));
  if (config.overlap_completion && discard.count() > 0) {
    selection = complete_overlaps(selection, r.ranked, fg_of, field, discard);
    clock.lap("overlap_completion");
  }
  counts.emplace_back("selected_patches", static_cast<std::int64_t>(selection.size()));
  counts.emplace_back("uncovered_pixels", static_cast<std::int64_t>(selection.uncovered.size()));

  r.graph = build_graph(field, fg_of, selection, config.threads);
  counts.emplace_back("graph_edges", static_cast<std::int64_t>(r.graph.graph.edges.size()));
  counts.emplace_back("positive_edges", positive_edges(r.graph.graph));
  clock.lap("patch_graph");

  const Partition partition = config.partitioner == PartitionerKind::Cc ? cc_positive(r.graph.graph)
                                                                          : mutex_watershed(r.graph.graph);
  clock.lap("partition");

  r.segmentation = assemble(selection, partition, fg_of);
  if (config.min_instance_size > 0) {
    r.segmentation = filter_small(r.segmentation, static_cast<std::size_t>(config.min_instance_size));
    r.segmentation.label_map = flatten(r.segmentation, fg_of);
  }
  clock.lap("assemble");
  counts.emplace_back("instances", static_cast<std::int64_t>(r.segmentation.size()));
  r.selection = std::move(selection);
  return r;
}

Tensor<float> score_image(const Grid& grid, const std::vector<ScoredPatch>& ranked) {
  Tensor<float> out(spatial_shape(grid), std::numeric_limits<float>::quiet_NaN());
  for (const ScoredPatch& p : ranked) out[static_cast<std::size_t>(p.pixel)] = static_cast<float>(p.score);
  return out;
}

}  // namespace patchasm
