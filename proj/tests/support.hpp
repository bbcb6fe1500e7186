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

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "taxo/taxonomy.hpp"

namespace taxo::testing {

// proteins -> membrane proteins -> bacterial outer membrane proteins -> porins,
// optionally with "membrane transport proteins" as a second child of
// "membrane proteins".
inline Taxonomy protein_fixture(bool with_transport = true) {
  std::vector<Concept> concepts = {
      {"proteins", {"proteins"}},
      {"membrane", {"membrane", "proteins"}},
      {"bomp", {"bacterial", "outer", "membrane", "proteins"}},
      {"porins", {"porins"}},
  };
  std::vector<Edge> edges = {{"proteins", "membrane"}, {"membrane", "bomp"}, {"bomp", "porins"}};
  if (with_transport) {
    concepts.push_back({"transport", {"membrane", "transport", "proteins"}});
    edges.push_back({"membrane", "transport"});
  }
  return Taxonomy(concepts, edges);
}

inline CandidatePosition at(std::set<ConceptId> parents, std::set<ConceptId> children) {
  CandidatePosition pos;
  pos.parents = std::move(parents);
  pos.children = std::move(children);
  return pos;
}

// a -> b -> c -> d
inline Taxonomy chain_fixture() {
  return Taxonomy({{"a", {"alpha"}}, {"b", {"beta"}}, {"c", {"gamma"}}, {"d", {"delta"}}},
                  {{"a", "b"}, {"b", "c"}, {"c", "d"}});
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("taxo-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace taxo::testing
