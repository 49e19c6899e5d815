#pragma once

// Entity tagging and relation scoring on top of the shared language model.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jnrf/corpus.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/ops.hpp"
#include "jnrf/params.hpp"
#include "jnrf/schema.hpp"

namespace jnrf {

inline constexpr int kNumHeads = kNumRelationTypes;

/// Row-wise argmax; ties go to the lowest class id.
inline std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(m.rows, 0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < m.cols; ++c)
      if (row[c] > row[best]) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

/// Spans from BIO labels. B-X opens an X span, I-X extends an open X span,
/// I-X after O or after another type opens a new X span, O closes.
inline std::vector<TokenSpan> decode_labels(const std::vector<int>& labels) {
  std::vector<TokenSpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l == kOutsideLabel) {
      open = false;
      continue;
    }
    const EntityType t = label_type(l);
    if (is_inside(l) && open && spans.back().type == t) {
      spans.back().end = i + 1;
      continue;
    }
    spans.push_back({i, i + 1, t});
    open = true;
  }
  return spans;
}

struct DecodedEntities {
  std::vector<int> labels;  // a_i
  std::vector<TokenSpan> spans;
};

inline DecodedEntities decode_bio(const Matrix& logits) {
  DecodedEntities d;
  d.labels = argmax_rows(logits);
  d.spans = decode_labels(d.labels);
  return d;
}

struct PooledSets {
  std::vector<std::size_t> h;  // indices into the span list: drugs
  std::vector<std::size_t> l;  // everything else
  std::vector<std::size_t> pos_h, pos_l;
};

/// Splits spans into drugs (H) and attributes (L), each positioned at its
/// first token.
inline PooledSets partition_spans(const std::vector<TokenSpan>& spans) {
  PooledSets p;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].end <= spans[i].begin) continue;  // covers no token
    if (spans[i].type == EntityType::kDrug) {
      p.h.push_back(i);
      p.pos_h.push_back(spans[i].begin);
    } else {
      p.l.push_back(i);
      p.pos_l.push_back(spans[i].begin);
    }
  }
  return p;
}

/// Q = E[posH], K = E[posL].
inline std::pair<Tensor, Tensor> selective_pool(const Tensor& e, const PooledSets& sets) {
  return {gather_rows(e, sets.pos_h), gather_rows(e, sets.pos_l)};
}

/// D[a][b] = |posH[a] - posL[b]|, a constant.
inline Matrix distance_matrix(const std::vector<std::size_t>& pos_h, const std::vector<std::size_t>& pos_l) {
  Matrix d(pos_h.size(), pos_l.size());
  for (std::size_t a = 0; a < pos_h.size(); ++a)
    for (std::size_t b = 0; b < pos_l.size(); ++b)
      d(a, b) = static_cast<double>(pos_h[a] > pos_l[b] ? pos_h[a] - pos_l[b] : pos_l[b] - pos_h[a]);
  return d;
}

struct HeadConfig {
  std::size_t d = 64;
  std::size_t key_dim = 64;
  std::size_t depth = 1;  // linear layers per Q/K map; hidden layers use GELU
};

inline std::string head_prefix(char qk, int j) { return std::string("re.") + qk + std::to_string(j) + "."; }

inline void register_relation_heads(ParamStore& ps, const HeadConfig& cfg, Rng& rng) {
  if (cfg.depth == 0) throw ConfigError("head depth must be >= 1");
  for (int j = 0; j < kNumHeads; ++j) {
    for (char qk : {'q', 'k'}) {
      std::size_t in = cfg.d;
      for (std::size_t layer = 0; layer < cfg.depth; ++layer) {
        const std::size_t out = layer + 1 == cfg.depth ? cfg.key_dim : cfg.d;
        const std::string p = head_prefix(qk, j) + std::to_string(layer) + ".";
        ps.add_weight(p + "w", in, out, rng);
        ps.add_const(p + "b", 1, out, 0.0);
        in = out;
      }
    }
  }
  ps.add_const("re.alpha", kNumHeads, 3, 0.0);
}

inline Tensor head_map(const Tensor& x, const ParamStore& ps, char qk, int j, std::size_t depth) {
  Tensor h = x;
  for (std::size_t layer = 0; layer < depth; ++layer) {
    const std::string p = head_prefix(qk, j) + std::to_string(layer) + ".";
    h = linear(h, ps.get(p + "w"), ps.get(p + "b"));
    if (layer + 1 < depth) h = gelu(h);
  }
  return h;
}

/// Psi_j = Q_j K_j^T + alpha_j1 D^2 + alpha_j2 D + alpha_j3, one |H| x |L|
/// matrix per head. `alpha` is kNumHeads x 3.
inline Tensor distance_bias(const Tensor& a, const Tensor& alpha, int j, const Matrix& dist) {
  const Matrix& av = a.value();
  const Matrix& al = alpha.value();
  if (!av.same_shape(dist)) throw DimensionError("distance_bias: scores " + shape_str(av) + " vs distances " + shape_str(dist));
  const double c1 = al(static_cast<std::size_t>(j), 0), c2 = al(static_cast<std::size_t>(j), 1), c3 = al(static_cast<std::size_t>(j), 2);
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double dd = dist.data[i];
    out.data[i] += c1 * dd * dd + c2 * dd + c3;
  }
  return Tensor::make(std::move(out), {a, alpha}, [j, dist](detail::Node& self) {
    auto& pa = detail::parent(self, 0);
    auto& pal = detail::parent(self, 1);
    if (pa.requires_grad) kernel::axpy(pa.ensure_grad(), self.grad);
    if (pal.requires_grad) {
      double g1 = 0.0, g2 = 0.0, g3 = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        const double g = self.grad.data[i], dd = dist.data[i];
        g1 += g * dd * dd;
        g2 += g * dd;
        g3 += g;
      }
      Matrix& ga = pal.ensure_grad();
      ga(static_cast<std::size_t>(j), 0) += g1;
      ga(static_cast<std::size_t>(j), 1) += g2;
      ga(static_cast<std::size_t>(j), 2) += g3;
    }
  });
}

inline std::vector<Tensor> relation_scores(const Tensor& q, const Tensor& k, const Matrix& dist, const ParamStore& ps,
                                           const HeadConfig& cfg) {
  const Tensor& alpha = ps.get("re.alpha");
  std::vector<Tensor> psi;
  psi.reserve(kNumHeads);
  for (int j = 0; j < kNumHeads; ++j) {
    const Tensor a = matmul_nt(head_map(q, ps, 'q', j, cfg.depth), head_map(k, ps, 'k', j, cfg.depth));
    psi.push_back(distance_bias(a, alpha, j, dist));
  }
  return psi;
}

/// r[h][p][j] stored sparsely: for key p and head j, the target drug row.
struct RelationTarget {
  std::size_t key;
  int head;
  std::size_t drug;
};

/// -(1/(|H||L|)) sum over targets of log softmax_h Psi_j[h, p] at the gold drug.
inline Tensor re_loss(const std::vector<Tensor>& psi, const std::vector<RelationTarget>& targets) {
  if (psi.empty() || psi[0].rows() == 0 || psi[0].cols() == 0) return Tensor::constant(Matrix(1, 1, 0.0));
  const std::size_t nh = psi[0].rows(), nl = psi[0].cols();
  if (targets.empty()) return Tensor::constant(Matrix(1, 1, 0.0));
  // Only heads that carry a target contribute; others have all-zero r.
  std::vector<int> slot(psi.size(), -1);
  std::vector<Tensor> cols;
  for (const auto& t : targets) {
    if (t.head < 0 || static_cast<std::size_t>(t.head) >= psi.size() || t.key >= nl || t.drug >= nh) {
      throw DimensionError("re_loss: target outside " + shape_str(nh, nl));
    }
    if (slot[static_cast<std::size_t>(t.head)] < 0) {
      slot[static_cast<std::size_t>(t.head)] = static_cast<int>(cols.size());
      cols.push_back(transpose(psi[static_cast<std::size_t>(t.head)]));
    }
  }
  const Tensor ls = log_softmax_rows(cols.size() == 1 ? cols[0] : concat_rows(cols));
  const double w = -1.0 / static_cast<double>(nh * nl);
  std::vector<WeightedEntry> picks;
  picks.reserve(targets.size());
  for (const auto& t : targets) {
    picks.push_back({static_cast<std::size_t>(slot[static_cast<std::size_t>(t.head)]) * nl + t.key, t.drug, w});
  }
  return pick_sum(ls, std::move(picks));
}

/// Mean token cross-entropy.
inline Tensor ner_loss(const Tensor& logits, const std::vector<int>& labels) {
  if (labels.size() != logits.rows()) {
    throw DimensionError("ner_loss: " + std::to_string(labels.size()) + " labels for " + shape_str(logits.value()));
  }
  if (labels.empty()) return Tensor::constant(Matrix(1, 1, 0.0));
  const Tensor ls = log_softmax_rows(logits);
  const double w = -1.0 / static_cast<double>(labels.size());
  std::vector<WeightedEntry> picks;
  picks.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= logits.cols()) throw DimensionError("ner_loss: label out of range");
    picks.push_back({i, static_cast<std::size_t>(labels[i]), w});
  }
  return pick_sum(ls, std::move(picks));
}

inline Tensor joint_loss(const Tensor& ner, const Tensor& re) { return add(ner, re); }

struct PredictedRelation {
  std::size_t key;   // index into L
  std::size_t drug;  // index into H
  int head;
};

/// One relation per attribute: its type's head picks the highest scoring
/// drug, ties to the lowest index.
inline std::vector<PredictedRelation> predict_relations(const std::vector<Matrix>& psi, const std::vector<EntityType>& key_types) {
  std::vector<PredictedRelation> out;
  if (psi.empty() || psi[0].rows == 0) return out;
  for (std::size_t p = 0; p < key_types.size(); ++p) {
    const auto head = relation_for_attribute(key_types[p]);
    if (!head) continue;
    const Matrix& m = psi[static_cast<std::size_t>(*head)];
    std::size_t best = 0;
    for (std::size_t h = 1; h < m.rows; ++h)
      if (m(h, p) > m(best, p)) best = h;
    out.push_back({p, best, *head});
  }
  return out;
}

}  // namespace jnrf
