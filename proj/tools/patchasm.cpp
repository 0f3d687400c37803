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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "patchasm/config.hpp"
#include "patchasm/io.hpp"
#include "patchasm/metrics.hpp"
#include "patchasm/npy.hpp"
#include "patchasm/oracle.hpp"
#include "patchasm/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace patchasm;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitFailure = 1;

struct Command {
  explicit Command(CLI::App* sub) : app(sub) {}
  CLI::App* app;
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_config_flags(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_path, "TOML config, flat JSON config or run manifest");
  for (const ConfigKey& k : config_keys()) {
    std::string& slot = cmd.values[k.name];
    CLI::Option* opt = k.type == KeyType::Bool
                           ? cmd.app->add_flag("--" + k.name + "{true}", slot, k.help)
                           : cmd.app->add_option("--" + k.name, slot, k.help);
    cmd.options[k.name] = opt;
  }
}

PipelineConfig resolve(const Command& cmd) {
  PipelineConfig c = cmd.config_path.empty() ? default_config() : load_config(cmd.config_path);
  for (const ConfigKey& k : config_keys())
    if (cmd.options.at(k.name)->count() > 0) apply_flag(c, k.name, cmd.values.at(k.name));
  validate(c);
  return c;
}

void require_path(const std::string& value, const std::string& key) {
  if (value.empty()) throw ConfigError("missing required setting --" + key);
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

ShapeParams shape_params(const PipelineConfig& c) {
  ShapeParams p;
  p.shape.assign(c.shape.begin(), c.shape.end());
  p.min_count = c.min_count;
  p.max_count = c.max_count;
  p.min_radius = c.min_radius;
  p.max_radius = c.max_radius;
  p.strip_width = c.strip_width;
  p.min_length = c.min_length;
  p.max_length = c.max_length;
  p.max_overlap_extent = c.max_overlap_extent;
  return p;
}

PredictionBundle synthesize(const PipelineConfig& c, const GroundTruth& gt) {
  PredictionBundle b = synth(gt, PatchGeometry(c.patch), c.t, c.fg_threshold);
  if (c.flip_prob > 0.0 || c.jitter_sigma > 0.0) b = corrupt(b, {c.flip_prob, c.jitter_sigma, c.seed});
  return b;
}

int run_synth(const PipelineConfig& c) {
  require_path(c.output, "output");
  if (c.patch.size() != c.shape.size()) throw ConfigError("patch and shape must have the same number of axes");
  const fs::path out(c.output);
  fs::create_directories(out);
  const GroundTruth gt = make_shapes(parse_shape_kind(c.kind), shape_params(c), c.seed);
  const PredictionBundle b = synthesize(c, gt);
  write_instances(out / "gt_masks.npy", gt.grid, gt.masks);
  write_bundle(out, b);
  ordered_json m;
  m["command"] = "synth";
  m["config"] = to_json(c);
  m["instances"] = gt.masks.size();
  write_text(out / "manifest.json", m.dump(2) + "\n");
  std::cout << "synth: " << gt.masks.size() << " instances written to " << out.string() << "\n";
  return 0;
}

int run_assemble(const PipelineConfig& c) {
  require_path(c.input, "input");
  require_path(c.output, "output");
  const fs::path out(c.output);
  const PredictionBundle b = read_bundle(c.input, c.patch, c.t, c.fg_threshold);
  const PipelineResult r = run_pipeline(b, c);
  fs::create_directories(out);

  std::vector<std::string> outputs{"instances.npy", "labels.npy"};
  write_instances(out / "instances.npy", b.grid, r.segmentation.masks);
  write_labels(out / "labels.npy", b.grid, r.segmentation.label_map);
  if (c.dump_consensus && r.field) {
    write_npy(out / "consensus_numerator.npy", r.field->numerator_planes());
    write_npy(out / "consensus_count.npy", r.field->count_planes());
    outputs.insert(outputs.end(), {"consensus_numerator.npy", "consensus_count.npy"});
  }
  if (c.dump_scores && r.field) {
    write_npy(out / "scores.npy", score_image(b.grid, r.ranked));
    outputs.push_back("scores.npy");
  }
  if (c.dump_edges && r.field) {
    std::ostringstream edges;
    write_edge_list(edges, r.graph.graph);
    write_text(out / "edges.txt", edges.str());
    outputs.push_back("edges.txt");
  }

  ordered_json m;
  m["command"] = "assemble";
  m["config"] = to_json(c);
  ordered_json timings = ordered_json::object();
  for (const auto& t : r.timings) timings[t.stage] = t.seconds;
  timings["total"] = r.total_seconds();
  m["timings"] = timings;
  ordered_json counts = ordered_json::object();
  for (const auto& [k, v] : r.counts) counts[k] = v;
  m["counts"] = counts;
  m["outputs"] = outputs;
  write_text(out / "manifest.json", m.dump(2) + "\n");
  std::printf("assemble: %zu instances, %.3f s\n", r.segmentation.size(), r.total_seconds());
  return 0;
}

int run_eval(const PipelineConfig& c) {
  require_path(c.pred, "pred");
  require_path(c.gt, "gt");
  const GroundTruth pred = read_instances(c.pred);
  const GroundTruth gt = read_instances(c.gt);
  if (!(pred.grid == gt.grid)) {
    auto describe = [](const Grid& g) {
      std::string s;
      for (Index e : g.shape()) s += (s.empty() ? "" : "x") + std::to_string(e);
      return s;
    };
    throw ValidationError("shape mismatch: prediction is " + describe(pred.grid) + ", ground truth is " +
                          describe(gt.grid));
  }
  const EvalReport report = evaluate(pred.masks, gt.masks, parse_threshold_grid(c.thresholds));
  const std::string tsv = to_tsv(report);
  if (!c.output.empty()) {
    fs::create_directories(c.output);
    write_text(fs::path(c.output) / "eval.tsv", tsv);
    write_text(fs::path(c.output) / "eval.json", to_json(report));
  }
  std::cout << tsv;
  return 0;
}

int run_bench(const PipelineConfig& c) {
  ordered_json rows = ordered_json::array();
  std::vector<std::string> stages;
  std::ostringstream tsv;
  bool header = false;
  for (const std::string& size : c.bench_sizes) {
    PipelineConfig run = c;
    apply_flag(run, "shape", size);
    for (int extent : c.bench_patches) {
      run.patch.assign(run.shape.size(), extent);
      const GroundTruth gt = make_shapes(parse_shape_kind(run.kind), shape_params(run), run.seed);
      const PredictionBundle b = synthesize(run, gt);
      const PixelSet fg = image_foreground(b);
      const double fg_fraction = static_cast<double>(fg.count()) / static_cast<double>(b.grid.size());
      for (int rep = 0; rep < c.bench_repeats; ++rep) {
        const PipelineResult r = run_pipeline(b, run);
        const std::size_t mark = tsv.str().size();
        if (!header) {
          for (const auto& t : r.timings) stages.push_back(t.stage);
          tsv << "size\tpatch\tthreads\tfg_fraction\tinstances";
          for (const auto& s : stages) tsv << "\t" << s;
          tsv << "\ttotal\n";
          header = true;
        }
        ordered_json row;
        row["size"] = size;
        row["patch"] = run.patch;
        row["threads"] = run.threads;
        row["fg_fraction"] = fg_fraction;
        row["instances"] = r.segmentation.size();
        ordered_json timings = ordered_json::object();
        for (const auto& t : r.timings) timings[t.stage] = t.seconds;
        timings["total"] = r.total_seconds();
        row["timings"] = timings;
        rows.push_back(row);

        char buf[64];
        tsv << size << "\t" << extent << "\t" << run.threads << "\t";
        std::snprintf(buf, sizeof buf, "%.4f", fg_fraction);
        tsv << buf << "\t" << r.segmentation.size();
        for (const auto& s : stages) {
          double secs = 0.0;
          for (const auto& t : r.timings)
            if (t.stage == s) secs = t.seconds;
          std::snprintf(buf, sizeof buf, "\t%.4f", secs);
          tsv << buf;
        }
        std::snprintf(buf, sizeof buf, "\t%.4f\n", r.total_seconds());
        tsv << buf;
        std::cout << tsv.str().substr(mark) << std::flush;
      }
    }
  }
  if (!c.output.empty()) {
    fs::create_directories(c.output);
    ordered_json j;
    j["command"] = "bench";
    j["config"] = to_json(c);
    j["rows"] = rows;
    write_text(fs::path(c.output) / "bench.json", j.dump(2) + "\n");
    write_text(fs::path(c.output) / "bench.tsv", tsv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patchasm: instance assembly from dense shape-patch predictions"};
  app.require_subcommand(1);
  Command synth_cmd{app.add_subcommand("synth", "generate synthetic ground truth and a prediction bundle")};
  Command assemble_cmd{app.add_subcommand("assemble", "assemble instances from a prediction bundle")};
  Command eval_cmd{app.add_subcommand("eval", "score predicted instances against ground truth")};
  Command bench_cmd{app.add_subcommand("bench", "time the pipeline stages over patch and image sizes")};
  for (Command* cmd : {&synth_cmd, &assemble_cmd, &eval_cmd, &bench_cmd}) add_config_flags(*cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*synth_cmd.app) return run_synth(resolve(synth_cmd));
    if (*assemble_cmd.app) return run_assemble(resolve(assemble_cmd));
    if (*eval_cmd.app) return run_eval(resolve(eval_cmd));
    if (*bench_cmd.app) return run_bench(resolve(bench_cmd));
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NpyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
