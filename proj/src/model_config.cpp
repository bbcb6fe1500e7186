// Copyright 2026 The Taxocomp Authors.
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

#include "taxo/model_config.hpp"

#include <charconv>
#include <sstream>

#include "taxo/errors.hpp"

namespace taxo {

FusionStrategy parse_fusion(const std::string& name) {
  if (name == "mean") return FusionStrategy::kMean;
  if (name == "max") return FusionStrategy::kMax;
  if (name == "attention") return FusionStrategy::kAttention;
  if (name == "concat") return FusionStrategy::kConcat;
  throw ConfigError("unknown fusion strategy '" + name + "'");
}

std::string to_string(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::kMean: return "mean";
    case FusionStrategy::kMax: return "max";
    case FusionStrategy::kAttention: return "attention";
    case FusionStrategy::kConcat: return "concat";
  }
  return "concat";
}

Aggregate parse_aggregate(const std::string& name) {
  if (name == "mean") return Aggregate::kMean;
  if (name == "attention") return Aggregate::kAttention;
  throw ConfigError("unknown aggregate '" + name + "'");
}

std::string to_string(Aggregate a) { return a == Aggregate::kMean ? "mean" : "attention"; }

void ModelConfig::validate() const {
  if (vocab_size <= 4) throw ConfigError("vocabulary holds only reserved tokens");
  if (hidden_dim == 0 || graph_dim == 0 || readout_dim == 0) throw ConfigError("zero dimension");
  if (seq_layers == 0 || graph_layers == 0) throw ConfigError("need at least one layer");
  if (classifier_hidden1 == 0 || classifier_hidden2 == 0) throw ConfigError("zero classifier width");
  if (max_name_len == 0) throw ConfigError("max_name_len must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
}

std::string fmt_double(double v) {
  // Shortest text that parses back to the same double.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t get_size(const KeyValues& kv, const std::string& key, std::size_t fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("bad integer for '" + key + "': '" + it->second + "'");
  }
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for '" + key + "': '" + it->second + "'");
  }
}

KeyValues ModelConfig::to_key_values() const {
  return {
      {"model.vocab_size", std::to_string(vocab_size)},
      {"model.node_count", std::to_string(node_count)},
      {"model.hidden_dim", std::to_string(hidden_dim)},
      {"model.graph_dim", std::to_string(graph_dim)},
      {"model.seq_layers", std::to_string(seq_layers)},
      {"model.graph_layers", std::to_string(graph_layers)},
      {"model.aggregate", to_string(aggregate)},
      {"model.directed", directed ? "1" : "0"},
      {"fusion.strategy", to_string(fusion)},
      {"model.classifier_hidden1", std::to_string(classifier_hidden1)},
      {"model.classifier_hidden2", std::to_string(classifier_hidden2)},
      {"model.readout_dim", std::to_string(readout_dim)},
      {"model.max_name_len", std::to_string(max_name_len)},
      {"model.classifier_input", classifier_input == ClassifierInput::kFused ? "fused" : "decoder"},
      {"model.dropout", fmt_double(dropout)},
      {"model.token_init_scale", fmt_double(token_init_scale)},
      {"model.init_scale", fmt_double(init_scale)},
  };
}

ModelConfig ModelConfig::from_key_values(const KeyValues& kv) {
  ModelConfig c;
  c.vocab_size = get_size(kv, "model.vocab_size", c.vocab_size);
  c.node_count = get_size(kv, "model.node_count", c.node_count);
  c.hidden_dim = get_size(kv, "model.hidden_dim", c.hidden_dim);
  c.graph_dim = get_size(kv, "model.graph_dim", c.graph_dim);
  c.seq_layers = get_size(kv, "model.seq_layers", c.seq_layers);
  c.graph_layers = get_size(kv, "model.graph_layers", c.graph_layers);
  if (auto it = kv.find("model.aggregate"); it != kv.end()) c.aggregate = parse_aggregate(it->second);
  c.directed = get_size(kv, "model.directed", c.directed ? 1 : 0) != 0;
  if (auto it = kv.find("fusion.strategy"); it != kv.end()) c.fusion = parse_fusion(it->second);
  c.classifier_hidden1 = get_size(kv, "model.classifier_hidden1", c.classifier_hidden1);
  c.classifier_hidden2 = get_size(kv, "model.classifier_hidden2", c.classifier_hidden2);
  c.readout_dim = get_size(kv, "model.readout_dim", c.readout_dim);
  c.max_name_len = get_size(kv, "model.max_name_len", c.max_name_len);
  if (auto it = kv.find("model.classifier_input"); it != kv.end()) {
    if (it->second == "fused") {
      c.classifier_input = ClassifierInput::kFused;
    } else if (it->second == "decoder") {
      c.classifier_input = ClassifierInput::kDecoderState;
    } else {
      throw ConfigError("unknown classifier input '" + it->second + "'");
    }
  }
  c.dropout = get_double(kv, "model.dropout", c.dropout);
  c.token_init_scale = get_double(kv, "model.token_init_scale", c.token_init_scale);
  c.init_scale = get_double(kv, "model.init_scale", c.init_scale);
  return c;
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

KeyValues read_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace taxo
