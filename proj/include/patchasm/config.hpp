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
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "patchasm/core.hpp"

namespace patchasm {

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class PartitionerKind { Cc, Mws };

/// Every tunable of the tool. Defaults are the documented defaults; the same
/// flat key names are used in TOML files, on the command line and in run
/// manifests.
struct PipelineConfig {
  // assembly
  std::vector<int> patch{7, 7};
  double t = 0.9;
  double fg_threshold = 0.5;
  bool sparse = true;
  PartitionerKind partitioner = PartitionerKind::Cc;
  bool mws_dense = false;
  bool thin_out = true;
  bool overlap_completion = true;
  std::int64_t min_instance_size = 0;
  std::string thresholds = "fine";
  int threads = 1;
  std::uint64_t seed = 0;
  std::string input;
  std::string output;
  bool dump_consensus = false;
  bool dump_scores = false;
  bool dump_edges = false;

  // synth
  std::string kind = "blobs";
  std::vector<std::int64_t> shape{64, 64};
  int min_count = 3;
  int max_count = 8;
  double min_radius = 3.0;
  double max_radius = 9.0;
  int strip_width = 5;
  double min_length = 20.0;
  double max_length = 40.0;
  int max_overlap_extent = 13;
  double flip_prob = 0.0;
  double jitter_sigma = 0.0;

  // eval
  std::string pred;
  std::string gt;

  // bench
  std::vector<int> bench_patches{7, 13, 25};
  std::vector<std::string> bench_sizes{"128x128", "256x256", "520x696"};
  int bench_repeats = 1;
};

/// Value of PATCHASM_THREADS when set to a positive integer, otherwise 1.
int default_threads();

PipelineConfig default_config();

enum class KeyType { Bool, Int, Float, String, IntList, StringList };

struct ConfigKey {
  std::string name;
  KeyType type;
  std::string help;
  std::function<nlohmann::json(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const nlohmann::json&)> set;
};

const std::vector<ConfigKey>& config_keys();
const ConfigKey* find_key(std::string_view name);

/// Applies the entries of a flat JSON object; unknown keys and ill-typed
/// values raise ConfigError.
void apply_json(PipelineConfig& config, const nlohmann::json& object);
nlohmann::ordered_json to_json(const PipelineConfig& config);

/// Applies a command-line value. Lists are comma separated ("7,7"); booleans
/// accept true/false/1/0.
void apply_flag(PipelineConfig& config, const std::string& key, const std::string& text);

/// Flat TOML subset: top-level `key = value` pairs with strings, integers,
/// floats, booleans and (possibly multi-line) arrays of those; `#` comments.
nlohmann::json parse_toml(std::string_view text);

/// Reads a TOML config, a flat JSON config, or a run manifest (its "config"
/// object) over the defaults.
PipelineConfig load_config(const std::filesystem::path& path);

void validate(const PipelineConfig& config);

std::string_view to_string(PartitionerKind kind);

}  // namespace patchasm
