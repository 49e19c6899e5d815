#pragma once

// Lenient micro-averaged scoring of entities and end-to-end relations, with
// per-type, document-length and sentence-distance breakdowns.
//
// Lenient: an entity matches when the type is equal and the character spans
// overlap by at least one. A relation matches when the relation type is equal
// and both arguments match leniently. Matching is greedy in document order,
// one-to-one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "jnrf/annotate.hpp"
#include "jnrf/corpus.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/schema.hpp"

namespace jnrf {

struct MatchCounts {
  long tp = 0, fp = 0, fn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const MatchCounts&) const = default;
};

enum class MatchMode { kLenient, kStrict };

inline bool entities_match(const EntitySpan& p, const EntitySpan& g, MatchMode mode) {
  if (p.type != g.type) return false;
  return mode == MatchMode::kStrict ? p.start == g.start && p.end == g.end : p.overlaps(g);
}

namespace detail {

/// Indices of `v` ordered by (start, end), stable.
inline std::vector<std::size_t> document_order(const std::vector<EntitySpan>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return v[a].start != v[b].start ? v[a].start < v[b].start : v[a].end < v[b].end;
  });
  return idx;
}

template <class Pred>
MatchCounts greedy(std::size_t n_gold, const std::vector<std::size_t>& pred_order,
                   const std::vector<std::size_t>& gold_order, Pred&& match) {
  MatchCounts c;
  std::vector<bool> used(n_gold, false);
  for (std::size_t p : pred_order) {
    bool hit = false;
    for (std::size_t g : gold_order) {
      if (used[g] || !match(p, g)) continue;
      used[g] = true;
      hit = true;
      break;
    }
    hit ? ++c.tp : ++c.fp;
  }
  c.fn = static_cast<long>(n_gold) - c.tp;
  return c;
}

}  // namespace detail

inline MatchCounts match_entities(const std::vector<EntitySpan>& pred, const std::vector<EntitySpan>& gold,
                                  MatchMode mode = MatchMode::kLenient) {
  return detail::greedy(gold.size(), detail::document_order(pred), detail::document_order(gold),
                        [&](std::size_t p, std::size_t g) { return entities_match(pred[p], gold[g], mode); });
}

/// A relation with its arguments resolved to spans.
struct RelationView {
  int type = 0;
  EntitySpan attr;
  EntitySpan drug;
};

inline std::vector<RelationView> relation_views(const Document& doc) {
  std::vector<RelationView> out;
  out.reserve(doc.gold_relations.size());
  for (const auto& r : doc.gold_relations) {
    if (r.arg1 >= doc.gold_entities.size() || r.arg2 >= doc.gold_entities.size()) {
      throw DataError(doc.doc_id + ": relation " + r.id + " references a missing entity");
    }
    out.push_back({r.type, doc.gold_entities[r.arg1], doc.gold_entities[r.arg2]});
  }
  return out;
}

inline MatchCounts match_relations(const std::vector<RelationView>& pred, const std::vector<RelationView>& gold,
                                   MatchMode mode = MatchMode::kLenient) {
  auto order = [](const std::vector<RelationView>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (v[a].attr.start != v[b].attr.start) return v[a].attr.start < v[b].attr.start;
      return v[a].drug.start < v[b].drug.start;
    });
    return idx;
  };
  return detail::greedy(gold.size(), order(pred), order(gold), [&](std::size_t p, std::size_t g) {
    return pred[p].type == gold[g].type && entities_match(pred[p].attr, gold[g].attr, mode) &&
           entities_match(pred[p].drug, gold[g].drug, mode);
  });
}

/// Freedman-Diaconis bins anchored at 0: bin k holds lengths in
/// [k*width, (k+1)*width).
struct LengthBins {
  std::size_t width = 0;
  std::size_t count = 0;

  std::size_t bin_of(std::size_t len) const { return len / width; }
};

/// Linear-interpolation quantile of sorted data (position q*(n-1)).
inline double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) throw DataError("quantile of empty data");
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline LengthBins fd_length_bins(const std::vector<std::size_t>& lengths) {
  if (lengths.size() < 2) throw DataError("length bins need at least 2 documents");
  std::vector<double> s(lengths.begin(), lengths.end());
  std::sort(s.begin(), s.end());
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  const auto max_len = static_cast<std::size_t>(s.back());
  LengthBins b;
  const double w = std::round(2.0 * iqr * std::pow(static_cast<double>(s.size()), -1.0 / 3.0));
  if (iqr <= 0.0 || w < 1.0) {
    b.width = max_len + 1;  // one bin
  } else {
    b.width = static_cast<std::size_t>(w);
  }
  b.count = max_len / b.width + 1;
  return b;
}

/// Sentence index of the drug minus that of the attribute; negative when the
/// drug comes first.
inline long sentence_distance(const RelationView& r, const std::vector<std::size_t>& sentence_char_starts_) {
  const auto sd = static_cast<long>(sentence_of_offset(sentence_char_starts_, r.drug.start));
  const auto sa = static_cast<long>(sentence_of_offset(sentence_char_starts_, r.attr.start));
  return sd - sa;
}

inline long sentence_distance(const Relation& rel, const Document& doc) {
  const RelationView v{rel.type, doc.gold_entities.at(rel.arg1), doc.gold_entities.at(rel.arg2)};
  return sentence_distance(v, sentence_char_starts(doc.text));
}

struct LengthBinRow {
  std::size_t lo = 0, hi = 0;  // [lo, hi)
  std::size_t docs = 0;
  MatchCounts counts;
};

struct EvalReport {
  MatchCounts ner;
  std::map<int, MatchCounts> ner_by_type;  // EntityType as int
  MatchCounts e2e;
  std::map<int, MatchCounts> e2e_by_type;  // relation type
  std::vector<LengthBinRow> by_length;     // empty bins omitted
  std::map<long, MatchCounts> by_distance;
};

/// Scores predictions against gold documents paired by doc_id. Gold documents
/// must be tokenized (lengths are token counts).
inline EvalReport build_report(const std::vector<Document>& pred, const std::vector<Document>& gold,
                               MatchMode mode = MatchMode::kLenient) {
  std::map<std::string, const Document*> by_id;
  for (const auto& d : pred) by_id[d.doc_id] = &d;
  std::string missing;
  for (const auto& g : gold)
    if (!by_id.count(g.doc_id)) missing += (missing.empty() ? "" : ", ") + g.doc_id;
  if (!missing.empty()) throw DataError("predictions missing for documents: " + missing);

  EvalReport rep;
  std::vector<MatchCounts> doc_e2e;
  for (const auto& g : gold) {
    const Document& p = *by_id[g.doc_id];
    for (int t = 0; t < kNumEntityTypes; ++t) {
      std::vector<EntitySpan> pt, gt;
      for (const auto& e : p.gold_entities)
        if (static_cast<int>(e.type) == t) pt.push_back(e);
      for (const auto& e : g.gold_entities)
        if (static_cast<int>(e.type) == t) gt.push_back(e);
      const MatchCounts c = match_entities(pt, gt, mode);
      rep.ner_by_type[t] += c;
      rep.ner += c;
    }
    const auto pv = relation_views(p), gv = relation_views(g);
    MatchCounts doc_total;
    for (int t = 0; t < kNumRelationTypes; ++t) {
      std::vector<RelationView> pt, gt;
      for (const auto& r : pv)
        if (r.type == t) pt.push_back(r);
      for (const auto& r : gv)
        if (r.type == t) gt.push_back(r);
      const MatchCounts c = match_relations(pt, gt, mode);
      rep.e2e_by_type[t] += c;
      doc_total += c;
    }
    rep.e2e += doc_total;
    doc_e2e.push_back(doc_total);

    const auto starts = sentence_char_starts(g.text);
    std::map<long, std::pair<std::vector<RelationView>, std::vector<RelationView>>> strata;
    for (const auto& r : pv) strata[sentence_distance(r, starts)].first.push_back(r);
    for (const auto& r : gv) strata[sentence_distance(r, starts)].second.push_back(r);
    for (const auto& [dist, pg] : strata) rep.by_distance[dist] += match_relations(pg.first, pg.second, mode);
  }

  if (gold.size() >= 2) {
    std::vector<std::size_t> lengths;
    for (const auto& g : gold) lengths.push_back(g.tokens.size());
    const LengthBins bins = fd_length_bins(lengths);
    std::vector<LengthBinRow> rows(bins.count);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      rows[k].lo = k * bins.width;
      rows[k].hi = (k + 1) * bins.width;
    }
    for (std::size_t i = 0; i < gold.size(); ++i) {
      auto& row = rows[bins.bin_of(lengths[i])];
      ++row.docs;
      row.counts += doc_e2e[i];
    }
    for (auto& r : rows)
      if (r.docs > 0) rep.by_length.push_back(r);
  }
  return rep;
}

namespace detail {

inline std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * x);
  return buf;
}

inline std::string row(const std::string& key, const MatchCounts& c, int width) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s %8s %8s %8s %6ld %6ld %6ld\n", width, key.c_str(), pct(c.precision()).c_str(),
                pct(c.recall()).c_str(), pct(c.f1()).c_str(), c.tp, c.fp, c.fn);
  return buf;
}

inline std::string header(const std::string& title, int width) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s %8s %8s %8s %6s %6s %6s\n", width, title.c_str(), "P", "R", "F1", "TP", "FP", "FN");
  return buf;
}

inline std::string length_key(const LengthBinRow& r) {
  return "[" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + ")";
}

inline std::string distance_key(long d) { return d > 0 ? "+" + std::to_string(d) : std::to_string(d); }

}  // namespace detail

/// Human-readable tables.
inline std::string render_report(const EvalReport& r) {
  constexpr int w = 16;
  std::string out;
  out += detail::header("NER", w);
  for (const auto& [t, c] : r.ner_by_type) out += detail::row(std::string(entity_name(static_cast<EntityType>(t))), c, w);
  out += detail::row("Overall", r.ner, w);
  out += "\n" + detail::header("E2E", w);
  for (const auto& [t, c] : r.e2e_by_type) out += detail::row(std::string(relation_name(t)), c, w);
  out += detail::row("Overall", r.e2e, w);
  if (!r.by_length.empty()) {
    out += "\n" + detail::header("Length (docs)", w);
    for (const auto& b : r.by_length) out += detail::row(detail::length_key(b) + " " + std::to_string(b.docs), b.counts, w);
  }
  if (!r.by_distance.empty()) {
    out += "\n" + detail::header("Sent. distance", w);
    for (const auto& [d, c] : r.by_distance) out += detail::row(detail::distance_key(d), c, w);
  }
  return out;
}

/// section<TAB>key<TAB>P<TAB>R<TAB>F1, percentages with two decimals.
inline std::string report_tsv(const EvalReport& r) {
  std::string out;
  auto line = [&](const std::string& section, const std::string& key, const MatchCounts& c) {
    out += section + "\t" + key + "\t" + detail::pct(c.precision()) + "\t" + detail::pct(c.recall()) + "\t" +
           detail::pct(c.f1()) + "\n";
  };
  line("ner", "overall", r.ner);
  for (const auto& [t, c] : r.ner_by_type) line("ner", std::string(entity_name(static_cast<EntityType>(t))), c);
  line("e2e", "overall", r.e2e);
  for (const auto& [t, c] : r.e2e_by_type) line("e2e", std::string(relation_name(t)), c);
  for (const auto& b : r.by_length) line("length", detail::length_key(b), b.counts);
  for (const auto& [d, c] : r.by_distance) line("distance", detail::distance_key(d), c);
  return out;
}

}  // namespace jnrf
