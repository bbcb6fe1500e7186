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

#include "taxo/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "taxo/errors.hpp"

namespace taxo {

namespace {

constexpr char kMagic[4] = {'G', 'T', 'X', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("checkpoint truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string get_str(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  if (n > (1u << 24)) throw FormatError("checkpoint string too long");
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw FormatError("checkpoint truncated");
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model<float>& model, const TokenVocabulary& vocab,
                      const NodeIndex& nodes) {
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(vocab.size()));
  for (const auto& t : vocab.tokens()) put_str(out, t);
  put_u32(out, static_cast<std::uint32_t>(nodes.size()));
  for (const auto& id : nodes.ids()) put_str(out, id);

  const auto& store = model.params();
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& p : store) {
    put_str(out, p.name);
    const bool matrix = p.value.shape.cols != 1;
    put_u32(out, matrix ? 2 : 1);
    put_u32(out, static_cast<std::uint32_t>(p.value.shape.rows));
    if (matrix) put_u32(out, static_cast<std::uint32_t>(p.value.shape.cols));
    for (float v : p.value.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }

  const KeyValues kv = model.config().to_key_values();
  put_u32(out, static_cast<std::uint32_t>(kv.size()));
  for (const auto& [k, v] : kv) {
    put_str(out, k);
    put_str(out, v);
  }
  if (!out) throw IOError("checkpoint write failed");
}

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model,
                     const TokenVocabulary& vocab, const NodeIndex& nodes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path.string());
  write_checkpoint(out, model, vocab, nodes);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  TokenVocabulary vocab;
  const std::uint32_t n_tokens = get_u32(in);
  for (std::uint32_t i = 0; i < n_tokens; ++i) {
    const std::string tok = get_str(in);
    if (i < static_cast<std::uint32_t>(kNumReservedTokens)) {
      if (tok != kReservedTokens[i]) throw FormatError("reserved token " + std::to_string(i) + " is '" + tok + "'");
      continue;
    }
    if (vocab.add(tok) != static_cast<TokenId>(i)) throw FormatError("duplicate token '" + tok + "'");
  }
  std::vector<ConceptId> ids(get_u32(in));
  for (auto& id : ids) id = get_str(in);
  NodeIndex nodes(ids);
  if (nodes.size() != ids.size()) throw FormatError("duplicate node ids");

  struct Record {
    std::string name;
    ad::Shape shape;
    std::vector<float> values;
  };
  std::vector<Record> records(get_u32(in));
  for (auto& r : records) {
    r.name = get_str(in);
    const std::uint32_t rank = get_u32(in);
    if (rank != 1 && rank != 2) throw FormatError("parameter '" + r.name + "' has rank " + std::to_string(rank));
    r.shape.rows = get_u32(in);
    r.shape.cols = rank == 2 ? get_u32(in) : 1;
    if (r.shape.size() > (1u << 28)) throw FormatError("parameter '" + r.name + "' too large");
    r.values.resize(r.shape.size());
    for (auto& v : r.values) v = std::bit_cast<float>(get_u32(in));
  }
  KeyValues kv;
  const std::uint32_t n_kv = get_u32(in);
  for (std::uint32_t i = 0; i < n_kv; ++i) {
    std::string k = get_str(in);
    kv[k] = get_str(in);
  }

  const ModelConfig cfg = ModelConfig::from_key_values(kv);
  if (cfg.vocab_size != vocab.size()) throw FormatError("config vocabulary size disagrees with vocabulary block");
  if (cfg.node_count != nodes.size()) throw FormatError("config node count disagrees with node block");
  Checkpoint ck{std::move(vocab), std::move(nodes), Model<float>(cfg, 0)};
  auto& store = ck.model.params();
  if (records.size() != store.size()) throw FormatError("parameter count disagrees with config");
  for (auto& r : records) {
    auto id = store.find(r.name);
    if (!id) throw FormatError("unexpected parameter '" + r.name + "'");
    auto& p = store[*id];
    if (p.value.shape != r.shape) {
      throw FormatError("parameter '" + r.name + "' has shape " + r.shape.to_string() + ", expected " +
                        p.value.shape.to_string());
    }
    p.value.values = std::move(r.values);
  }
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot read " + path.string());
  return read_checkpoint(in);
}

}  // namespace taxo
