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

#include "taxo/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "taxo/errors.hpp"

namespace taxo {

namespace {

std::string join_ids(const std::set<ConceptId>& ids) {
  if (ids.empty()) return "-";
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ',';
    out += id;
  }
  return out;
}

std::set<ConceptId> split_ids(const std::string& s) {
  std::set<ConceptId> out;
  if (s == "-") return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    if (end > start) out.insert(s.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

void write_insertion(std::ostream& out, const char* kind, const Insertion& ins) {
  out << kind << '\t' << ins.id << '\t' << join_tokens(ins.name) << '\t'
      << join_ids(ins.position.parents) << '\t' << join_ids(ins.position.children) << '\t'
      << std::setprecision(17) << ins.p_valid << '\n';
}

std::size_t to_count(const std::string& s, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw FormatError("report line " + std::to_string(lineno) + ": bad count '" + s + "'");
}

}  // namespace

void write_report(std::ostream& out, const CompletionReport& r) {
  for (const auto& ins : r.insertions) write_insertion(out, "insertion", ins);
  for (const auto& ins : r.duplicates) write_insertion(out, "duplicate", ins);
  for (std::size_t i = 0; i < r.iterations.size(); ++i) {
    out << "iteration\t" << i + 1 << '\t' << r.iterations[i].new_concepts << '\t'
        << r.iterations[i].taxonomy_size << '\n';
  }
  out << "positions\t" << r.positions_scored << '\t' << r.positions_skipped << '\n';
  if (r.metrics) {
    std::ostringstream block;
    write_metrics(block, *r.metrics);
    std::istringstream lines(block.str());
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find('\t') != std::string::npos) out << "metric\t" << line << '\n';
    }
  }
}

CompletionReport read_report(std::istream& in) {
  CompletionReport r;
  std::string line;
  std::size_t lineno = 0;
  std::ostringstream metric_block;
  bool has_metrics = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = fields(line);
    const auto& kind = f[0];
    if (kind == "insertion" || kind == "duplicate") {
      if (f.size() != 6) throw FormatError("report line " + std::to_string(lineno) + ": expected 6 fields");
      Insertion ins;
      ins.id = f[1];
      ins.name = tokenize_name(f[2]);
      ins.position.parents = split_ids(f[3]);
      ins.position.children = split_ids(f[4]);
      try {
        ins.p_valid = std::stod(f[5]);
      } catch (const std::exception&) {
        throw FormatError("report line " + std::to_string(lineno) + ": bad probability");
      }
      (kind == "insertion" ? r.insertions : r.duplicates).push_back(std::move(ins));
    } else if (kind == "iteration") {
      if (f.size() != 4) throw FormatError("report line " + std::to_string(lineno) + ": expected 4 fields");
      r.iterations.push_back({to_count(f[2], lineno), to_count(f[3], lineno)});
    } else if (kind == "positions") {
      if (f.size() != 3) throw FormatError("report line " + std::to_string(lineno) + ": expected 3 fields");
      r.positions_scored = to_count(f[1], lineno);
      r.positions_skipped = to_count(f[2], lineno);
    } else if (kind == "metric") {
      if (f.size() != 3) throw FormatError("report line " + std::to_string(lineno) + ": expected 3 fields");
      metric_block << f[1] << '\t' << f[2] << '\n';
      has_metrics = true;
    } else {
      throw FormatError("report line " + std::to_string(lineno) + ": unknown record '" + kind + "'");
    }
  }
  if (has_metrics) {
    std::istringstream block(metric_block.str());
    r.metrics = parse_metrics(block);
  }
  return r;
}

void save_report(const CompletionReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  write_report(out, r);
}

CompletionReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot read " + path.string());
  return read_report(in);
}

}  // namespace taxo
