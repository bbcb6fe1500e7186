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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>

namespace taxo {

enum class Aggregate { kMean, kAttention };
enum class FusionStrategy { kMean, kMax, kAttention, kConcat };
enum class ClassifierInput { kFused, kDecoderState };

FusionStrategy parse_fusion(const std::string& name);  // ConfigError if unknown
std::string to_string(FusionStrategy s);
Aggregate parse_aggregate(const std::string& name);
std::string to_string(Aggregate a);

using KeyValues = std::map<std::string, std::string>;

// Round-trippable text for a double.
std::string fmt_double(double v);
// Lookups with a fallback for absent keys; malformed values throw ConfigError.
std::size_t get_size(const KeyValues& kv, const std::string& key, std::size_t fallback);
double get_double(const KeyValues& kv, const std::string& key, double fallback);

// Flat "key=value" text, one entry per line; '#' comments and blank lines
// are ignored.
void write_key_values(std::ostream& out, const KeyValues& kv);
KeyValues read_key_values(std::istream& in);

// Architecture hyperparameters. Defaults follow the reference setting:
// 200-d sequence states, 100-d graph states, three BiGRU layers, K = 2.
struct ModelConfig {
  std::size_t vocab_size = 0;
  // Concepts with a free node embedding; rows 0 and 1 of each node table
  // are the anchor ([MASK]) and unknown-node embeddings.
  std::size_t node_count = 0;
  std::size_t hidden_dim = 200;  // token embeddings, BiGRU per direction, h(s), decoder
  std::size_t graph_dim = 100;
  std::size_t seq_layers = 3;
  std::size_t graph_layers = 2;
  Aggregate aggregate = Aggregate::kMean;
  bool directed = true;
  FusionStrategy fusion = FusionStrategy::kConcat;
  std::size_t classifier_hidden1 = 128;
  std::size_t classifier_hidden2 = 64;
  std::size_t readout_dim = 200;
  std::size_t max_name_len = 12;
  ClassifierInput classifier_input = ClassifierInput::kFused;
  double dropout = 0.3;
  double token_init_scale = 1.0;  // stddev of the token embedding init
  double init_scale = 0.1;        // stddev of the node embedding init

  std::size_t fused_dim() const {
    return fusion == FusionStrategy::kConcat ? hidden_dim + graph_dim : hidden_dim;
  }
  std::size_t classifier_input_dim() const {
    return classifier_input == ClassifierInput::kFused ? fused_dim() : hidden_dim;
  }

  void validate() const;
  KeyValues to_key_values() const;
  // Unknown keys are ignored; malformed values throw ConfigError.
  static ModelConfig from_key_values(const KeyValues& kv);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace taxo
