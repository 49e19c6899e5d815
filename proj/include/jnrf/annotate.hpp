#pragma once

// Token-level annotation of documents: BIO alignment of gold spans and
// rule-based sentence splitting.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "jnrf/corpus.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/schema.hpp"
#include "jnrf/wordpiece.hpp"

namespace jnrf {

/// Token range covered by every gold entity. A token belongs to an entity iff
/// their character spans overlap.
inline std::vector<TokenSpan> entity_token_spans(const Document& doc) {
  std::vector<TokenSpan> spans;
  spans.reserve(doc.gold_entities.size());
  for (const auto& e : doc.gold_entities) {
    // first token whose end is past e.start
    auto it = std::lower_bound(doc.tokens.begin(), doc.tokens.end(), e.start,
                               [](const Token& t, std::size_t pos) { return t.end <= pos; });
    std::size_t b = static_cast<std::size_t>(it - doc.tokens.begin());
    std::size_t end = b;
    while (end < doc.tokens.size() && doc.tokens[end].start < e.end) ++end;
    spans.push_back({b, end, e.type});
  }
  return spans;
}

/// BIO label per token: the first overlapping token of an entity is B-type,
/// the rest I-type, uncovered tokens O. Throws AlignmentError when one token
/// overlaps two gold entities.
inline std::vector<int> align_bio(const Document& doc) {
  std::vector<int> labels(doc.tokens.size(), kOutsideLabel);
  std::vector<long> owner(doc.tokens.size(), -1);
  const auto spans = entity_token_spans(doc);
  for (std::size_t e = 0; e < spans.size(); ++e) {
    for (std::size_t t = spans[e].begin; t < spans[e].end; ++t) {
      if (owner[t] >= 0) {
        const auto& a = doc.gold_entities[static_cast<std::size_t>(owner[t])];
        const auto& b = doc.gold_entities[e];
        throw AlignmentError(doc.doc_id + ": token " + std::to_string(t) + " '" + doc.tokens[t].surface +
                             "' overlaps entities " + a.id + " and " + b.id);
      }
      owner[t] = static_cast<long>(e);
      labels[t] = t == spans[e].begin ? begin_label(spans[e].type) : inside_label(spans[e].type);
    }
  }
  return labels;
}

namespace detail {

inline bool ends_sentence(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool newline_between(std::string_view text, std::size_t from, std::size_t to) {
  return text.substr(from, to - from).find('\n') != std::string_view::npos;
}

// Shared boundary rule over (start, end) character spans.
template <typename SpanAt>
std::vector<std::size_t> sentence_starts_over(std::string_view text, std::size_t count, SpanAt span_at) {
  std::vector<std::size_t> starts;
  if (count == 0) return starts;
  starts.push_back(0);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const auto [s, e] = span_at(i);
    const auto next = span_at(i + 1);
    const bool term = e > s && ends_sentence(text[e - 1]);
    if (term || newline_between(text, e, next.first)) starts.push_back(i + 1);
  }
  return starts;
}

}  // namespace detail

/// Sentence boundary after any token whose text ends with '.', '!' or '?', or
/// that is followed by a newline before the next token.
inline std::vector<std::size_t> split_sentences(const Document& doc) {
  return detail::sentence_starts_over(doc.text, doc.tokens.size(), [&](std::size_t i) {
    return std::make_pair(doc.tokens[i].start, doc.tokens[i].end);
  });
}

/// Character offset where each sentence begins, from the same rule applied to
/// pre-tokens. Independent of the vocabulary.
inline std::vector<std::size_t> sentence_char_starts(std::string_view text) {
  const auto pre = pre_tokenize(text);
  const auto idx = detail::sentence_starts_over(text, pre.size(), [&](std::size_t i) { return pre[i]; });
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(pre[i].first);
  return out;
}

/// Sentence index containing character offset `pos`.
inline std::size_t sentence_of_offset(const std::vector<std::size_t>& char_starts, std::size_t pos) {
  auto it = std::upper_bound(char_starts.begin(), char_starts.end(), pos);
  return it == char_starts.begin() ? 0 : static_cast<std::size_t>(it - char_starts.begin()) - 1;
}

/// Sentence index containing token `tok`.
inline std::size_t sentence_of_token(const std::vector<std::size_t>& sentence_starts, std::size_t tok) {
  return sentence_of_offset(sentence_starts, tok);
}

/// Tokenizes, splits sentences and aligns BIO labels in place.
inline void annotate(Document& doc, const Vocab& vocab) {
  doc.tokens = wordpiece_tokenize(doc.text, vocab);
  doc.sentence_starts = split_sentences(doc);
  doc.bio_labels = align_bio(doc);
  doc.gold_token_spans = entity_token_spans(doc);
}

inline void annotate_all(std::vector<Document>& docs, const Vocab& vocab) {
  for (auto& d : docs) annotate(d, vocab);
}

}  // namespace jnrf
