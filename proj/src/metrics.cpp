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

#include "taxo/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "taxo/errors.hpp"
#include "taxo/model_config.hpp"

namespace taxo {

namespace {

bool subset(const std::set<ConceptId>& a, const std::set<ConceptId>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(double v) { return fmt_double(v); }

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "absent"; }

std::string pct(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * *v;
  return os.str();
}

}  // namespace

double f1_score(double precision, double recall) {
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

MetricsReport score_completion(std::span<const Insertion> predictions, const Taxonomy& gold,
                               const std::set<ConceptId>& test_ids) {
  std::multimap<std::string, ConceptId> by_name;
  for (const auto& id : test_ids) {
    if (!gold.contains(id)) throw UnknownConcept("test concept '" + id + "' not in gold taxonomy");
    by_name.emplace(normalize_name(gold.name(id)), id);
  }
  std::set<ConceptId> matched;
  for (const auto& ins : predictions) {
    auto [lo, hi] = by_name.equal_range(normalize_name(ins.name));
    for (auto it = lo; it != hi; ++it) {
      const auto& id = it->second;
      if (subset(ins.position.parents, gold.parents(id)) &&
          subset(ins.position.children, gold.children(id))) {
        matched.insert(id);
      }
    }
  }
  MetricsReport m;
  m.counts.inserted = predictions.size();
  m.counts.correct = matched.size();
  m.counts.total_test = test_ids.size();
  m.precision = ratio(m.counts.correct, m.counts.inserted).value_or(0.0);
  m.recall = ratio(m.counts.correct, m.counts.total_test).value_or(0.0);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

GenerationScore score_generation(std::span<const std::pair<TokenSeq, TokenSeq>> pairs) {
  GenerationScore g;
  for (const auto& [generated, gold] : pairs) {
    if (gold.empty()) throw FormatError("gold name is empty");
    const bool hit = normalize_name(generated) == normalize_name(gold);
    ++g.total;
    g.correct += hit;
    if (gold.size() == 1) {
      ++g.uni_total;
      g.uni_correct += hit;
    } else {
      ++g.multi_total;
      g.multi_correct += hit;
    }
  }
  g.acc = ratio(g.correct, g.total);
  g.acc_uni = ratio(g.uni_correct, g.uni_total);
  g.acc_multi = ratio(g.multi_correct, g.multi_total);
  return g;
}

double roc_auc(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) throw ShapeError("AUC needs both classes");
  // Rank-sum form: sort the negatives once and count by binary search.
  std::vector<double> neg(negative.begin(), negative.end());
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  for (double p : positive) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(lo, neg.end(), p);
    wins += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(positive.size()) * static_cast<double>(negative.size()));
}

void merge_generation(MetricsReport& report, const GenerationScore& g) {
  report.acc = g.acc;
  report.acc_uni = g.acc_uni;
  report.acc_multi = g.acc_multi;
  report.counts.uni_total = g.uni_total;
  report.counts.multi_total = g.multi_total;
  report.counts.uni_correct = g.uni_correct;
  report.counts.multi_correct = g.multi_correct;
}

void write_metrics(std::ostream& out, const MetricsReport& m) {
  const std::pair<const char*, std::string> rows[] = {
      {"Precision", pct(m.precision)}, {"Recall", pct(m.recall)},   {"F1", pct(m.f1)},
      {"Acc", pct(m.acc)},             {"Acc-Uni", pct(m.acc_uni)}, {"Acc-Multi", pct(m.acc_multi)},
  };
  out << std::left << std::setw(12) << "metric" << std::right << std::setw(10) << "value" << '\n';
  for (const auto& [k, v] : rows) out << std::left << std::setw(12) << k << std::right << std::setw(10) << v << '\n';
  out << std::left << std::setw(12) << "inserted" << std::right << std::setw(10) << m.counts.inserted << '\n';
  out << std::left << std::setw(12) << "correct" << std::right << std::setw(10) << m.counts.correct << '\n';
  out << std::left << std::setw(12) << "test" << std::right << std::setw(10) << m.counts.total_test << '\n';
  out << '\n';
  out << "precision\t" << fmt(m.precision) << '\n';
  out << "recall\t" << fmt(m.recall) << '\n';
  out << "f1\t" << fmt(m.f1) << '\n';
  out << "acc\t" << fmt(m.acc) << '\n';
  out << "acc_uni\t" << fmt(m.acc_uni) << '\n';
  out << "acc_multi\t" << fmt(m.acc_multi) << '\n';
  out << "inserted\t" << m.counts.inserted << '\n';
  out << "correct\t" << m.counts.correct << '\n';
  out << "total_test\t" << m.counts.total_test << '\n';
  out << "uni_total\t" << m.counts.uni_total << '\n';
  out << "multi_total\t" << m.counts.multi_total << '\n';
  out << "uni_correct\t" << m.counts.uni_correct << '\n';
  out << "multi_correct\t" << m.counts.multi_correct << '\n';
}

MetricsReport parse_metrics(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    kv[line.substr(0, tab)] = line.substr(tab + 1);
  }
  auto real = [&](const char* key) -> std::optional<double> {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("metrics block lacks '") + key + "'");
    if (it->second == "absent") return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw FormatError("");
      return v;
    } catch (const std::exception&) {
      throw FormatError(std::string("bad value for '") + key + "': " + it->second);
    }
  };
  auto count = [&](const char* key) -> std::size_t {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(std::string("metrics block lacks '") + key + "'");
    std::size_t v = 0;
    const auto& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw FormatError(std::string("bad count for '") + key + "'");
    return v;
  };
  MetricsReport m;
  auto required = [&](const char* key) {
    auto v = real(key);
    if (!v) throw FormatError(std::string("'") + key + "' cannot be absent");
    return *v;
  };
  m.precision = required("precision");
  m.recall = required("recall");
  m.f1 = required("f1");
  m.acc = real("acc");
  m.acc_uni = real("acc_uni");
  m.acc_multi = real("acc_multi");
  m.counts.inserted = count("inserted");
  m.counts.correct = count("correct");
  m.counts.total_test = count("total_test");
  m.counts.uni_total = count("uni_total");
  m.counts.multi_total = count("multi_total");
  m.counts.uni_correct = count("uni_correct");
  m.counts.multi_correct = count("multi_correct");
  return m;
}

}  // namespace taxo
