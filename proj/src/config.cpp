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

#include "patchasm/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "patchasm/metrics.hpp"
#include "patchasm/npy.hpp"
#include "patchasm/oracle.hpp"

namespace patchasm {

using nlohmann::json;

int default_threads() {
  const char* env = std::getenv("PATCHASM_THREADS");
  if (!env) return 1;
  int v = 0;
  const std::string_view s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) return 1;
  return v;
}

PipelineConfig default_config() {
  PipelineConfig c;
  c.threads = default_threads();
  return c;
}

std::string_view to_string(PartitionerKind kind) { return kind == PartitionerKind::Cc ? "cc" : "mws"; }

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& expected) {
  throw ConfigError("config key '" + key + "' expects " + expected);
}

template <class T>
T integer_of(const std::string& key, const json& v) {
  if (!v.is_number_integer()) bad_value(key, "an integer");
  if constexpr (std::is_unsigned_v<T>) {
    if (v.is_number_unsigned()) return v.get<T>();
    const auto s = v.get<std::int64_t>();
    if (s < 0) bad_value(key, "a non-negative integer");
    return static_cast<T>(s);
  } else {
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<T>::max()))
      bad_value(key, "an integer in range");
    const auto s = v.get<std::int64_t>();
    if (s < std::numeric_limits<T>::min() || s > std::numeric_limits<T>::max()) bad_value(key, "an integer in range");
    return static_cast<T>(s);
  }
}

template <class T>
constexpr KeyType key_type_of() {
  if constexpr (std::is_same_v<T, bool>) return KeyType::Bool;
  else if constexpr (std::is_integral_v<T>) return KeyType::Int;
  else if constexpr (std::is_floating_point_v<T>) return KeyType::Float;
  else if constexpr (std::is_same_v<T, std::string>) return KeyType::String;
  else if constexpr (std::is_same_v<T, std::vector<std::string>>) return KeyType::StringList;
  else return KeyType::IntList;
}

template <class T>
ConfigKey member(std::string name, std::string help, T PipelineConfig::*field) {
  ConfigKey k;
  k.name = name;
  k.type = key_type_of<T>();
  k.help = std::move(help);
  k.get = [field](const PipelineConfig& c) { return json(c.*field); };
  k.set = [field, name](PipelineConfig& c, const json& v) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) bad_value(name, "a boolean");
      c.*field = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      c.*field = integer_of<T>(name, v);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) bad_value(name, "a number");
      c.*field = v.get<double>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) bad_value(name, "a string");
      c.*field = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v.is_array()) bad_value(name, "an array of strings");
      T out;
      for (const auto& e : v) {
        if (!e.is_string()) bad_value(name, "an array of strings");
        out.push_back(e.get<std::string>());
      }
      c.*field = std::move(out);
    } else {
      if (!v.is_array()) bad_value(name, "an array of integers");
      T out;
      for (const auto& e : v) out.push_back(integer_of<typename T::value_type>(name, e));
      c.*field = std::move(out);
    }
  };
  return k;
}

std::vector<ConfigKey> make_keys() {
  using C = PipelineConfig;
  std::vector<ConfigKey> keys;
  keys.push_back(member("patch", "patch extents per axis, odd (e.g. 7,7 or 7,7,7)", &C::patch));
  keys.push_back(member("t", "patch classification threshold in [0.5, 1]", &C::t));
  keys.push_back(member("fg_threshold", "image foreground threshold in (0, 1)", &C::fg_threshold));
  keys.push_back(member("sparse", "restrict consensus storage to foreground pixels", &C::sparse));
  {
    ConfigKey k;
    k.name = "partitioner";
    k.type = KeyType::String;
    k.help = "patch graph partitioner: cc or mws";
    k.get = [](const C& c) { return json(std::string(to_string(c.partitioner))); };
    k.set = [](C& c, const json& v) {
      if (!v.is_string()) bad_value("partitioner", "\"cc\" or \"mws\"");
      const auto s = v.get<std::string>();
      if (s == "cc") c.partitioner = PartitionerKind::Cc;
      else if (s == "mws") c.partitioner = PartitionerKind::Mws;
      else bad_value("partitioner", "\"cc\" or \"mws\"");
    };
    keys.push_back(std::move(k));
  }
  keys.push_back(member("mws_dense", "run the pixel-level mutex watershed baseline instead", &C::mws_dense));
  keys.push_back(member("thin_out", "run the thin-out pass after the greedy cover", &C::thin_out));
  keys.push_back(member("overlap_completion", "add patches until overlap pixels have two instances",
                        &C::overlap_completion));
  keys.push_back(member("min_instance_size", "drop instances with fewer pixels", &C::min_instance_size));
  keys.push_back(member("thresholds", "IoU grid: fine, coarse or start:step:stop", &C::thresholds));
  keys.push_back(member("threads", "worker threads (default from PATCHASM_THREADS, else 1)", &C::threads));
  keys.push_back(member("seed", "random seed for synth and bench", &C::seed));
  keys.push_back(member("input", "input directory (bundle for assemble)", &C::input));
  keys.push_back(member("output", "output directory", &C::output));
  keys.push_back(member("dump_consensus", "write consensus numerator and count planes", &C::dump_consensus));
  keys.push_back(member("dump_scores", "write the patch score image", &C::dump_scores));
  keys.push_back(member("dump_edges", "write the patch graph edge list", &C::dump_edges));
  keys.push_back(member("kind", "synthetic shapes: blobs, strips or crossing-strips", &C::kind));
  keys.push_back(member("shape", "synthetic image extents (e.g. 64,64)", &C::shape));
  keys.push_back(member("min_count", "minimum synthetic instance count", &C::min_count));
  keys.push_back(member("max_count", "maximum synthetic instance count", &C::max_count));
  keys.push_back(member("min_radius", "minimum blob semi-axis", &C::min_radius));
  keys.push_back(member("max_radius", "maximum blob semi-axis", &C::max_radius));
  keys.push_back(member("strip_width", "strip thickness in pixels", &C::strip_width));
  keys.push_back(member("min_length", "minimum strip segment length", &C::min_length));
  keys.push_back(member("max_length", "maximum strip segment length", &C::max_length));
  keys.push_back(member("max_overlap_extent", "crossing strips: overlap extent bound per axis",
                        &C::max_overlap_extent));
  keys.push_back(member("flip_prob", "probability of flipping each patch entry", &C::flip_prob));
  keys.push_back(member("jitter_sigma", "logit-space noise standard deviation", &C::jitter_sigma));
  keys.push_back(member("pred", "predicted instance stack (NPY, u1 [N, spatial])", &C::pred));
  keys.push_back(member("gt", "ground-truth instance stack (NPY, u1 [N, spatial])", &C::gt));
  keys.push_back(member("bench_patches", "bench: patch extents to sweep", &C::bench_patches));
  keys.push_back(member("bench_sizes", "bench: image sizes to sweep (e.g. 256x256)", &C::bench_sizes));
  keys.push_back(member("bench_repeats", "bench: runs per configuration", &C::bench_repeats));
  return keys;
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (seps.find(ch) != std::string::npos) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

json integer_text(const std::string& key, const std::string& s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (!s.empty() && ec == std::errc() && ptr == s.data() + s.size()) return json(v);
  std::uint64_t u = 0;
  const auto [uptr, uec] = std::from_chars(s.data(), s.data() + s.size(), u);
  if (s.empty() || uec != std::errc() || uptr != s.data() + s.size()) bad_value(key, "an integer");
  return json(u);
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

const ConfigKey* find_key(std::string_view name) {
  for (const auto& k : config_keys())
    if (k.name == name) return &k;
  return nullptr;
}

void apply_json(PipelineConfig& config, const json& object) {
  if (!object.is_object()) throw ConfigError("config must be a table of key/value pairs");
  for (const auto& [name, value] : object.items()) {
    const ConfigKey* k = find_key(name);
    if (!k) throw ConfigError("unknown config key '" + name + "'");
    k->set(config, value);
  }
}

nlohmann::ordered_json to_json(const PipelineConfig& config) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& k : config_keys()) j[k.name] = nlohmann::ordered_json::parse(k.get(config).dump());
  return j;
}

void apply_flag(PipelineConfig& config, const std::string& key, const std::string& text) {
  const ConfigKey* k = find_key(key);
  if (!k) throw ConfigError("unknown config key '" + key + "'");
  json v;
  switch (k->type) {
    case KeyType::Bool:
      if (text == "true" || text == "1") v = true;
      else if (text == "false" || text == "0") v = false;
      else bad_value(key, "true or false");
      break;
    case KeyType::Int:
      v = integer_text(key, text);
      break;
    case KeyType::Float: {
      char* end = nullptr;
      const double d = std::strtod(text.c_str(), &end);
      if (text.empty() || *end != '\0') bad_value(key, "a number");
      v = d;
      break;
    }
    case KeyType::String:
      v = text;
      break;
    case KeyType::IntList:
      v = json::array();
      for (const auto& part : split(text, ",x")) v.push_back(integer_text(key, part));
      break;
    case KeyType::StringList:
      v = json::array();
      for (const auto& part : split(text, ",")) v.push_back(part);
      break;
  }
  k->set(config, v);
}

namespace {

class TomlReader {
 public:
  explicit TomlReader(std::string_view text) : s_(text) {}

  json parse() {
    json out = json::object();
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') fail("tables are not supported; use top-level keys");
      const std::string key = parse_key();
      skip_space();
      expect('=');
      skip_space();
      json value = parse_value();
      skip_space();
      skip_comment();
      if (!at_end() && peek() != '\n') fail("unexpected text after value");
      if (out.contains(key)) fail("duplicate key '" + key + "'");
      out[key] = std::move(value);
    }
    return out;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_ = 1;

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  char take() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("TOML line " + std::to_string(line_) + ": " + what);
  }

  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    take();
  }
  void skip_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) take();
  }
  void skip_comment() {
    if (!at_end() && peek() == '#')
      while (!at_end() && peek() != '\n') take();
  }
  void skip_blank_lines() {
    while (true) {
      skip_space();
      skip_comment();
      if (at_end() || peek() != '\n') return;
      take();
    }
  }
  // Whitespace, newlines and comments inside arrays.
  void skip_insignificant() {
    while (true) {
      skip_space();
      skip_comment();
      if (at_end() || peek() != '\n') return;
      take();
    }
  }

  std::string parse_key() {
    if (peek() == '"' || peek() == '\'') return parse_string();
    std::string key;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
      key += take();
    if (key.empty()) fail("expected a key");
    if (!at_end() && peek() == '.') fail("dotted keys are not supported");
    return key;
  }

  std::string parse_string() {
    const char quote = take();
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == quote) return out;
      if (c == '\\' && quote == '"') {
        if (at_end()) fail("unterminated string");
        const char e = take();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
  }

  json parse_value() {
    if (at_end()) fail("missing value");
    const char c = peek();
    if (c == '"' || c == '\'') return parse_string();
    if (c == '[') return parse_array();
    std::string word;
    while (!at_end() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != '\n' && peek() != ' ' &&
           peek() != '\t' && peek() != '\r')
      word += take();
    if (word == "true") return true;
    if (word == "false") return false;
    if (word.empty()) fail("missing value");
    std::string digits;
    for (char ch : word)
      if (ch != '_') digits += ch;
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" ||
                          digits == "+inf" || digits == "-inf" || digits == "nan";
    if (!is_float) {
      std::int64_t v = 0;
      const char* b = digits.data();
      if (*b == '+') ++b;
      const auto [ptr, ec] = std::from_chars(b, digits.data() + digits.size(), v);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) fail("invalid value '" + word + "'");
      return v;
    }
    char* end = nullptr;
    const double d = std::strtod(digits.c_str(), &end);
    if (*end != '\0') fail("invalid value '" + word + "'");
    return d;
  }

  json parse_array() {
    expect('[');
    json out = json::array();
    while (true) {
      skip_insignificant();
      if (at_end()) fail("unterminated array");
      if (peek() == ']') {
        take();
        return out;
      }
      out.push_back(parse_value());
      skip_insignificant();
      if (at_end()) fail("unterminated array");
      if (peek() == ',') take();
      else if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }
};

}  // namespace

json parse_toml(std::string_view text) { return TomlReader(text).parse(); }

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const NpyError& e) {
    throw ConfigError(e.what());
  }
  PipelineConfig config = default_config();
  if (path.extension() == ".json") {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    if (j.is_object() && j.contains("config") && j["config"].is_object()) j = j["config"];
    apply_json(config, j);
  } else {
    apply_json(config, parse_toml(text));
  }
  return config;
}

void validate(const PipelineConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.patch.size() == 2 || c.patch.size() == 3, "patch must have 2 or 3 extents");
  for (int e : c.patch) require(e >= 1 && e % 2 == 1, "patch extents must be odd and positive");
  require(c.t >= 0.5 && c.t <= 1.0, "t must lie in [0.5, 1]");
  require(c.fg_threshold > 0.0 && c.fg_threshold < 1.0, "fg_threshold must lie in (0, 1)");
  require(c.min_instance_size >= 0, "min_instance_size must be non-negative");
  require(c.threads >= 1, "threads must be at least 1");
  parse_threshold_grid(c.thresholds);
  parse_shape_kind(c.kind);
  require(c.shape.size() == 2 || c.shape.size() == 3, "shape must have 2 or 3 extents");
  for (auto e : c.shape) require(e >= 1, "shape extents must be positive");
  require(c.min_count >= 1 && c.min_count <= c.max_count, "need 1 <= min_count <= max_count");
  require(c.min_radius > 0.0 && c.min_radius <= c.max_radius, "need 0 < min_radius <= max_radius");
  require(c.strip_width >= 1, "strip_width must be positive");
  require(c.min_length > 0.0 && c.min_length <= c.max_length, "need 0 < min_length <= max_length");
  require(c.max_overlap_extent >= 1, "max_overlap_extent must be positive");
  require(c.flip_prob >= 0.0 && c.flip_prob <= 1.0, "flip_prob must lie in [0, 1]");
  require(c.jitter_sigma >= 0.0 && std::isfinite(c.jitter_sigma), "jitter_sigma must be non-negative");
  for (int e : c.bench_patches) require(e >= 1 && e % 2 == 1, "bench_patches must be odd and positive");
  for (const auto& s : c.bench_sizes) {
    PipelineConfig probe;
    apply_flag(probe, "shape", s);
    require(probe.shape.size() == 2 || probe.shape.size() == 3, "bench_sizes entries must have 2 or 3 extents");
  }
  require(c.bench_repeats >= 1, "bench_repeats must be at least 1");
}

}  // namespace patchasm
