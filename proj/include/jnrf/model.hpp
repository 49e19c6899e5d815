#pragma once

// The joint entity and relation model:
//
//   E   = embed(ids)                         frozen table + positions
//   E1  = gelu(E W + b)                      token-wise
//   E2  = LM(E1)                             shared by both heads
//   l   = EN_MLP(E2)                         BIO logits
//   E3  = RE_MLP(E2) at pooled entity rows   drugs -> Q, attributes -> K
//   Psi = per-head Q_j K_j^T + distance polynomial
//
// RE_MLP is token-wise, so it is applied to the pooled rows only.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jnrf/annotate.hpp"
#include "jnrf/corpus.hpp"
#include "jnrf/counters.hpp"
#include "jnrf/embedding.hpp"
#include "jnrf/heads.hpp"
#include "jnrf/mixers.hpp"
#include "jnrf/ops.hpp"
#include "jnrf/params.hpp"

namespace jnrf {

enum class Pooling { kFirst, kMean };

struct ModelConfig {
  MixerConfig mixer;
  std::size_t key_dim = 64;
  std::size_t head_depth = 1;
  bool alpha_trainable = true;
  bool teacher_forcing = true;
  Pooling pooling = Pooling::kFirst;
  std::uint64_t init_seed = 1;

  HeadConfig heads() const { return {mixer.d, key_dim, head_depth}; }
};

/// One training or evaluation unit: a document or a sentence of one.
struct Instance {
  std::vector<int> ids;
  std::vector<int> labels;
  std::vector<TokenSpan> spans;  // gold, non-empty
  struct Rel {
    std::size_t attr;  // index into spans
    std::size_t drug;  // index into spans
    int type;
  };
  std::vector<Rel> relations;
};

/// Whole-document instance. Entities covering no token are dropped; an
/// attribute with several gold drugs keeps the first.
inline Instance document_instance(const Document& doc) {
  Instance in;
  in.ids = token_ids(doc);
  in.labels = doc.bio_labels;
  std::vector<long> remap(doc.gold_token_spans.size(), -1);
  for (std::size_t i = 0; i < doc.gold_token_spans.size(); ++i) {
    const auto& s = doc.gold_token_spans[i];
    if (s.end <= s.begin) continue;
    remap[i] = static_cast<long>(in.spans.size());
    in.spans.push_back(s);
  }
  std::vector<bool> has(in.spans.size(), false);
  for (const auto& r : doc.gold_relations) {
    if (r.arg1 >= remap.size() || r.arg2 >= remap.size()) continue;
    const long a = remap[r.arg1], d = remap[r.arg2];
    if (a < 0 || d < 0 || has[static_cast<std::size_t>(a)]) continue;
    has[static_cast<std::size_t>(a)] = true;
    in.relations.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(d), r.type});
  }
  return in;
}

/// One instance per sentence; relations crossing a sentence boundary are
/// dropped.
inline std::vector<Instance> sentence_instances(const Document& doc) {
  const Instance whole = document_instance(doc);
  std::vector<Instance> out;
  const auto& starts = doc.sentence_starts;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::size_t b = starts[s];
    const std::size_t e = s + 1 < starts.size() ? starts[s + 1] : whole.ids.size();
    Instance in;
    in.ids.assign(whole.ids.begin() + static_cast<long>(b), whole.ids.begin() + static_cast<long>(e));
    in.labels.assign(whole.labels.begin() + static_cast<long>(b), whole.labels.begin() + static_cast<long>(e));
    std::vector<long> remap(whole.spans.size(), -1);
    for (std::size_t i = 0; i < whole.spans.size(); ++i) {
      const auto& sp = whole.spans[i];
      if (sp.begin >= b && sp.end <= e) {
        remap[i] = static_cast<long>(in.spans.size());
        in.spans.push_back({sp.begin - b, sp.end - b, sp.type});
      }
    }
    for (const auto& r : whole.relations) {
      if (remap[r.attr] >= 0 && remap[r.drug] >= 0) {
        in.relations.push_back({static_cast<std::size_t>(remap[r.attr]), static_cast<std::size_t>(remap[r.drug]), r.type});
      }
    }
    out.push_back(std::move(in));
  }
  return out;
}

struct RelationForward {
  PooledSets sets;
  std::vector<Tensor> psi;  // empty when H or L is empty
};

struct LossParts {
  Tensor ner;
  Tensor re;
  Tensor total;
};

struct Prediction {
  std::vector<int> labels;
  std::vector<TokenSpan> spans;
  std::vector<Instance::Rel> relations;  // indices into spans
};

class JnrfModel {
 public:
  JnrfModel(ModelConfig cfg, EmbeddingTable table) : cfg_(std::move(cfg)), table_(std::move(table)) {
    cfg_.mixer.validate();
    if (table_.dim() % 2 != 0) throw ConfigError("embedding dimension must be even");
    Rng rng(cfg_.init_seed);
    const std::size_t d = cfg_.mixer.d;
    params_.add_weight("e1.w", table_.dim(), d, rng);
    params_.add_const("e1.b", 1, d, 0.0);
    register_shared_lm(params_, cfg_.mixer, rng);
    params_.add_weight("ner.w1", d, d, rng);
    params_.add_const("ner.b1", 1, d, 0.0);
    params_.add_weight("ner.w2", d, kNumBioClasses, rng);
    params_.add_const("ner.b2", 1, kNumBioClasses, 0.0);
    params_.add_weight("re.mlp.w", d, d, rng);
    params_.add_const("re.mlp.b", 1, d, 0.0);
    register_relation_heads(params_, cfg_.heads(), rng);
  }

  const ModelConfig& config() const { return cfg_; }
  const EmbeddingTable& table() const { return table_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  /// Parameters the optimizer updates.
  std::vector<std::pair<std::string, Tensor>> trainable() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (const auto& e : params_.entries())
      if (cfg_.alpha_trainable || e.first != "re.alpha") out.push_back(e);
    return out;
  }

  Tensor encode(const std::vector<int>& ids) const {
    Tensor e;
    {
      CountScope scope(OpCategory::kEmbedding);
      e = embed(ids, table_);
    }
    const Tensor e1 = gelu(linear(e, params_.get("e1.w"), params_.get("e1.b")));
    return shared_lm(e1, cfg_.mixer, params_);
  }

  Tensor ner_logits(const Tensor& e2) const {
    CountScope scope(OpCategory::kNerHead);
    return linear(gelu(linear(e2, params_.get("ner.w1"), params_.get("ner.b1"))), params_.get("ner.w2"), params_.get("ner.b2"));
  }

  RelationForward relation_forward(const Tensor& e2, const std::vector<TokenSpan>& spans) const {
    CountScope scope(OpCategory::kRelation);
    RelationForward out;
    out.sets = partition_spans(spans);
    if (out.sets.h.empty() || out.sets.l.empty()) return out;
    const Tensor q = pooled(e2, spans, out.sets.h);
    const Tensor k = pooled(e2, spans, out.sets.l);
    out.psi = relation_scores(q, k, distance_matrix(out.sets.pos_h, out.sets.pos_l), params_, cfg_.heads());
    return out;
  }

  /// Joint loss with relations pooled from gold spans (teacher forcing) or
  /// from decoded spans matched to gold by exact span and type.
  LossParts loss(const Instance& in) const {
    const Tensor e2 = encode(in.ids);
    const Tensor logits = ner_logits(e2);
    LossParts lp;
    lp.ner = ner_loss(logits, in.labels);
    std::vector<TokenSpan> spans = in.spans;
    std::vector<long> gold_of(spans.size());
    for (std::size_t i = 0; i < spans.size(); ++i) gold_of[i] = static_cast<long>(i);
    if (!cfg_.teacher_forcing) {
      spans = decode_bio(logits.value()).spans;
      gold_of.assign(spans.size(), -1);
      for (std::size_t i = 0; i < spans.size(); ++i)
        for (std::size_t g = 0; g < in.spans.size(); ++g)
          if (spans[i] == in.spans[g]) gold_of[i] = static_cast<long>(g);
    }
    const RelationForward rf = relation_forward(e2, spans);
    lp.re = re_loss(rf.psi, targets(rf.sets, gold_of, in));
    lp.total = joint_loss(lp.ner, lp.re);
    return lp;
  }

  Prediction predict(const std::vector<int>& ids) const {
    NoGradGuard guard;
    const Tensor e2 = encode(ids);
    Prediction p;
    auto dec = decode_bio(ner_logits(e2).value());
    p.labels = std::move(dec.labels);
    p.spans = std::move(dec.spans);
    const RelationForward rf = relation_forward(e2, p.spans);
    if (rf.psi.empty()) return p;
    std::vector<Matrix> psi;
    for (const auto& t : rf.psi) psi.push_back(t.value());
    std::vector<EntityType> key_types;
    for (std::size_t i : rf.sets.l) key_types.push_back(p.spans[i].type);
    for (const auto& r : predict_relations(psi, key_types)) {
      p.relations.push_back({rf.sets.l[r.key], rf.sets.h[r.drug], r.head});
    }
    return p;
  }

 private:
  Tensor pooled(const Tensor& e2, const std::vector<TokenSpan>& spans, const std::vector<std::size_t>& which) const {
    const Tensor& w = params_.get("re.mlp.w");
    const Tensor& b = params_.get("re.mlp.b");
    if (cfg_.pooling == Pooling::kFirst) {
      std::vector<std::size_t> rows;
      for (std::size_t i : which) rows.push_back(spans[i].begin);
      return gelu(linear(gather_rows(e2, rows), w, b));
    }
    std::vector<std::size_t> rows;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    for (std::size_t i : which) {
      ranges.emplace_back(rows.size(), rows.size() + spans[i].end - spans[i].begin);
      for (std::size_t t = spans[i].begin; t < spans[i].end; ++t) rows.push_back(t);
    }
    return segment_mean(gelu(linear(gather_rows(e2, rows), w, b)), ranges);
  }

  static std::vector<RelationTarget> targets(const PooledSets& sets, const std::vector<long>& gold_of, const Instance& in) {
    std::vector<RelationTarget> out;
    if (sets.h.empty() || sets.l.empty()) return out;
    std::vector<long> h_of_gold(in.spans.size(), -1), l_of_gold(in.spans.size(), -1);
    for (std::size_t a = 0; a < sets.h.size(); ++a)
      if (gold_of[sets.h[a]] >= 0) h_of_gold[static_cast<std::size_t>(gold_of[sets.h[a]])] = static_cast<long>(a);
    for (std::size_t b = 0; b < sets.l.size(); ++b)
      if (gold_of[sets.l[b]] >= 0) l_of_gold[static_cast<std::size_t>(gold_of[sets.l[b]])] = static_cast<long>(b);
    for (const auto& r : in.relations) {
      const long h = h_of_gold[r.drug], l = l_of_gold[r.attr];
      if (h < 0 || l < 0) continue;
      out.push_back({static_cast<std::size_t>(l), r.type, static_cast<std::size_t>(h)});
    }
    return out;
  }

  ModelConfig cfg_;
  EmbeddingTable table_;
  ParamStore params_;
};

/// Predicted entities and relations as a document over the same text.
inline Document prediction_document(const Document& doc, const Prediction& p) {
  Document out;
  out.doc_id = doc.doc_id;
  out.text = doc.text;
  out.tokens = doc.tokens;
  out.sentence_starts = doc.sentence_starts;
  for (std::size_t i = 0; i < p.spans.size(); ++i) {
    const auto& s = p.spans[i];
    EntitySpan e;
    e.id = "T" + std::to_string(i + 1);
    e.type = s.type;
    e.start = doc.tokens[s.begin].start;
    e.end = doc.tokens[s.end - 1].end;
    e.surface = doc.text.substr(e.start, e.end - e.start);
    out.gold_entities.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < p.relations.size(); ++i) {
    const auto& r = p.relations[i];
    out.gold_relations.push_back({"R" + std::to_string(i + 1), r.type, r.attr, r.drug});
  }
  out.gold_token_spans = p.spans;
  out.bio_labels = p.labels;
  return out;
}

}  // namespace jnrf
