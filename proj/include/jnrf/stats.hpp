#pragma once

// Corpus summary statistics: entity/relation distributions and document
// length (in tokens) per split.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jnrf/corpus.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/schema.hpp"

namespace jnrf {

struct LengthStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  std::size_t min = 0;
  std::size_t max = 0;
};

struct CorpusStats {
  std::array<std::size_t, kNumEntityTypes> entities{};
  std::array<std::size_t, kNumRelationTypes> relations{};
  std::vector<std::size_t> lengths;

  std::size_t entity_total() const {
    std::size_t s = 0;
    for (auto c : entities) s += c;
    return s;
  }
  std::size_t relation_total() const {
    std::size_t s = 0;
    for (auto c : relations) s += c;
    return s;
  }

  LengthStats length_stats() const {
    LengthStats l;
    l.count = lengths.size();
    if (lengths.empty()) return l;
    double sum = 0.0;
    for (auto n : lengths) sum += static_cast<double>(n);
    l.mean = sum / static_cast<double>(l.count);
    if (l.count > 1) {
      double ss = 0.0;
      for (auto n : lengths) ss += (static_cast<double>(n) - l.mean) * (static_cast<double>(n) - l.mean);
      l.std = std::sqrt(ss / static_cast<double>(l.count - 1));
    }
    l.min = *std::min_element(lengths.begin(), lengths.end());
    l.max = *std::max_element(lengths.begin(), lengths.end());
    return l;
  }

  void merge(const CorpusStats& o) {
    for (int i = 0; i < kNumEntityTypes; ++i) entities[i] += o.entities[i];
    for (int i = 0; i < kNumRelationTypes; ++i) relations[i] += o.relations[i];
    lengths.insert(lengths.end(), o.lengths.begin(), o.lengths.end());
  }
};

/// Documents must be tokenized; length is the token count.
inline CorpusStats corpus_stats(const std::vector<Document>& docs) {
  if (docs.empty()) throw DataError("corpus_stats: empty corpus");
  CorpusStats s;
  for (const auto& d : docs) {
    for (const auto& e : d.gold_entities) ++s.entities[static_cast<int>(e.type)];
    for (const auto& r : d.gold_relations) ++s.relations[r.type];
    s.lengths.push_back(d.tokens.size());
  }
  return s;
}

namespace detail {

inline std::string pad_left(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }
inline std::string pad_right(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

inline std::string count_pct(std::size_t c, std::size_t total) {
  const long pct = total ? std::lround(100.0 * static_cast<double>(c) / static_cast<double>(total)) : 0;
  return std::to_string(c) + " (" + std::to_string(pct) + ")";
}

}  // namespace detail

/// Text tables: distribution of entity and relation types (the first column
/// over all splits with percentages) and document length per split.
inline std::string render_stats(const std::vector<std::pair<std::string, CorpusStats>>& splits) {
  if (splits.empty()) throw DataError("render_stats: no splits");
  CorpusStats full;
  for (const auto& [name, s] : splits) full.merge(s);
  const std::size_t w0 = 16, w = 14;
  std::ostringstream os;

  auto dist_table = [&](const std::string& title, std::size_t n, auto label, auto count_of, auto total_of) {
    os << detail::pad_right(title, w0) << detail::pad_left("Full (%)", w);
    for (const auto& sp : splits) os << detail::pad_left(sp.first, w);
    os << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      os << detail::pad_right(std::string(label(i)), w0) << detail::pad_left(detail::count_pct(count_of(full, i), total_of(full)), w);
      for (const auto& sp : splits) os << detail::pad_left(std::to_string(count_of(sp.second, i)), w);
      os << '\n';
    }
    os << detail::pad_right("Total", w0) << detail::pad_left(detail::count_pct(total_of(full), total_of(full)), w);
    for (const auto& sp : splits) os << detail::pad_left(std::to_string(total_of(sp.second)), w);
    os << "\n\n";
  };

  dist_table(
      "Entity type", kNumEntityTypes, [](std::size_t i) { return kEntityNames[i]; },
      [](const CorpusStats& s, std::size_t i) { return s.entities[i]; }, [](const CorpusStats& s) { return s.entity_total(); });
  dist_table(
      "Relation type", kNumRelationTypes, [](std::size_t i) { return kRelationNames[i]; },
      [](const CorpusStats& s, std::size_t i) { return s.relations[i]; },
      [](const CorpusStats& s) { return s.relation_total(); });

  os << detail::pad_right("Length", w0);
  for (const auto& sp : splits) os << detail::pad_left(sp.first, w);
  os << '\n';
  auto row = [&](const std::string& name, auto fn) {
    os << detail::pad_right(name, w0);
    for (const auto& sp : splits) os << detail::pad_left(fn(sp.second.length_stats()), w);
    os << '\n';
  };
  auto fmt0 = [](double v) { return std::to_string(std::llround(v)); };
  row("Count", [](const LengthStats& l) { return std::to_string(l.count); });
  row("Mean", [&](const LengthStats& l) { return fmt0(l.mean); });
  row("Std", [&](const LengthStats& l) { return fmt0(l.std); });
  row("Min", [](const LengthStats& l) { return std::to_string(l.min); });
  row("Max", [](const LengthStats& l) { return std::to_string(l.max); });
  return os.str();
}

}  // namespace jnrf
