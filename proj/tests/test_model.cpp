#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jnrf/embedding.hpp"
#include "jnrf/heads.hpp"
#include "jnrf/mixers.hpp"
#include "jnrf/model.hpp"
#include "jnrf/synth.hpp"
#include "test_util.hpp"

using namespace jnrf;
using jnrf::testing::grad_check;
using jnrf::testing::project;
using jnrf::testing::random_matrix;

namespace {

MixerConfig small_mixer(MixerKind kind, std::size_t d = 8, std::size_t h = 6) {
  MixerConfig c;
  c.kind = kind;
  c.n_blocks = 1;
  c.d = d;
  c.ffn_hidden = h;
  c.window = 4;
  c.n_attn_heads = 2;
  return c;
}

// Perturbs every parameter away from its init so LayerNorm gains etc. are
// not all identical.
void jitter(ParamStore& ps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.1);
  for (auto& [name, t] : ps.entries())
    for (auto& v : t.mutable_value().data) v += nd(rng);
}

}  // namespace

// ---------------------------------------------------------------- embedding

TEST(Embedding, ParseTable) {
  Vocab v({"a", "b"});
  auto t = parse_table("a\t1 2 3\nb\t4 5 6\n[UNK]\t0 0 0\n", v);
  EXPECT_EQ(t.vocab_size(), 3u);
  EXPECT_EQ(t.dim(), 3u);
  EXPECT_EQ(t.weights(1, 2), 6.0);
}

TEST(Embedding, RaggedRowsRejected) {
  Vocab v({"a", "b"});
  EXPECT_THROW(parse_table("a\t1 2 3\nb\t4 5 6 7\n", v), ParseError);
  EXPECT_THROW(parse_table("a\t1 2\nzz\t1 2\n", v), ParseError);
  EXPECT_THROW(parse_table("a\t1 2\n", v), DataError);  // b missing
}

TEST(Embedding, FallbackDeterministic) {
  Vocab v({"a", "b", "c"});
  const auto t1 = load_table("", v, 16, 7), t2 = load_table("/nonexistent/file", v, 16, 7);
  EXPECT_EQ(t1.weights.data, t2.weights.data);
  EXPECT_EQ(t1.dim(), 16u);
  EXPECT_NE(random_table(4, 16, 8).weights.data, t1.weights.data);
}

TEST(Embedding, PositionalEncodingValues) {
  const auto p0 = positional_encoding(0, 6);
  EXPECT_EQ(p0, (std::vector<double>{0, 1, 0, 1, 0, 1}));
  const auto p1 = positional_encoding(1, 4);
  EXPECT_NEAR(p1[0], 0.841471, 1e-6);
  EXPECT_NEAR(p1[2], 0.0099998, 1e-7);
  EXPECT_THROW(positional_encoding(1, 5), ConfigError);
}

TEST(Embedding, NormIsPositionIndependent) {
  for (std::size_t pos : {0u, 3u, 1000u, 16383u}) {
    const auto p = positional_encoding(pos, 32);
    double s = 0;
    for (double x : p) s += x * x;
    EXPECT_NEAR(std::sqrt(s), 4.0, 1e-12);
  }
}

TEST(Embedding, EmbedAddsPositions) {
  EmbeddingTable zero{Matrix(5, 4)};
  const auto e = embed({3, 1, 4}, zero);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto pe = positional_encoding(i, 4);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(e.at(i, j), pe[j]);
  }
  auto t = random_table(5, 4, 1);
  const auto one = embed({2}, t);
  EXPECT_EQ(one.at(0, 0), t.weights(2, 0) + 0.0);
  EXPECT_EQ(one.at(0, 1), t.weights(2, 1) + 1.0);
  EXPECT_FALSE(one.requires_grad());
  EXPECT_THROW(embed({5}, t), DataError);
}

TEST(Embedding, AnyLength) {
  EmbeddingTable t{Matrix(2, 8)};
  for (std::size_t n : {1u, 4096u, 16384u}) {
    std::vector<int> ids(n, 1);
    const auto e = embed(ids, t);
    EXPECT_EQ(e.rows(), n);
    EXPECT_EQ(e.cols(), 8u);
  }
}

// ---------------------------------------------------------------- mixers

TEST(Mixers, FnetParameterCount) {
  const auto cfg = small_mixer(MixerKind::kFnet, 8, 6);
  ParamStore ps;
  Rng rng(1);
  register_block(ps, "b.", cfg, rng);
  const std::size_t d = 8, h = 6;
  EXPECT_EQ(ps.count("b."), 2 * (2 * d) + (d * h + h) + (h * d + d));
}

TEST(Mixers, FnetSingleToken) {
  const auto cfg = small_mixer(MixerKind::kFnet);
  ParamStore ps;
  Rng rng(1);
  register_block(ps, "b.", cfg, rng);
  std::mt19937_64 g(3);
  const auto y = fnet_block(Tensor::constant(random_matrix(g, 1, 8)), ps, "b.", cfg);
  EXPECT_EQ(y.rows(), 1u);
  EXPECT_EQ(y.cols(), 8u);
  for (double v : y.value().data) EXPECT_TRUE(std::isfinite(v));
}

TEST(Mixers, BlockGradients) {
  for (auto kind : {MixerKind::kFnet, MixerKind::kMlp, MixerKind::kWindowedAttention}) {
    const auto cfg = small_mixer(kind);
    ParamStore ps;
    Rng rng(2);
    register_block(ps, "b.", cfg, rng);
    jitter(ps, 5);
    std::mt19937_64 g(4);
    const Tensor x = Tensor::parameter(random_matrix(g, 9, 8));
    const Matrix w = random_matrix(g, 9, 8);
    std::vector<Tensor> params{x};
    for (auto& [n, t] : ps.entries())
      if (n != "b.attn.bk") params.push_back(t);  // checked separately below
    auto f = [&] {
      switch (kind) {
        case MixerKind::kFnet: return project(fnet_block(x, ps, "b.", cfg), w);
        case MixerKind::kMlp: return project(mlp_mixer_block(x, ps, "b.", cfg), w);
        default: return project(windowed_attention_block(x, ps, "b.", cfg), w);
      }
    };
    const auto r = grad_check(f, params);
    EXPECT_LT(r.max_rel_error, 1e-5) << mixer_kind_name(kind);
    if (kind == MixerKind::kWindowedAttention) {
      // A key bias shifts every score in a softmax row equally.
      ps.zero_grad();
      backward(f());
      for (double g : ps.get("b.attn.bk").grad().data) EXPECT_NEAR(g, 0.0, 1e-12);
    }
  }
}

TEST(Mixers, MlpIsTokenWise) {
  const auto cfg = small_mixer(MixerKind::kMlp);
  ParamStore ps;
  Rng rng(1);
  register_block(ps, "b.", cfg, rng);
  std::mt19937_64 g(3);
  Matrix x = random_matrix(g, 5, 8);
  for (std::size_t j = 0; j < 8; ++j) x(4, j) = x(1, j);  // duplicate row
  const auto y = mlp_mixer_block(Tensor::constant(x), ps, "b.", cfg).value();
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  Matrix xp(5, 8);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 8; ++j) xp(i, j) = x(perm[i], j);
  const auto yp = mlp_mixer_block(Tensor::constant(xp), ps, "b.", cfg).value();
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      EXPECT_EQ(yp(i, j), y(perm[i], j));
      EXPECT_EQ(y(4, j), y(1, j));
    }
}

TEST(Mixers, WindowSegments) {
  const auto s = window_segments(1030, 512);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].second - s[0].first, 512u);
  EXPECT_EQ(s[1].second - s[1].first, 512u);
  EXPECT_EQ(s[2].second - s[2].first, 6u);
  EXPECT_EQ(window_segments(4045, 512).size(), 8u);
}

TEST(Mixers, WindowBoundaryIsolation) {
  auto cfg = small_mixer(MixerKind::kWindowedAttention);
  ParamStore ps;
  Rng rng(1);
  register_block(ps, "b.", cfg, rng);
  std::mt19937_64 g(3);
  Matrix x = random_matrix(g, 10, 8);
  const auto y1 = windowed_attention_block(Tensor::constant(x), ps, "b.", cfg).value();
  for (std::size_t j = 0; j < 8; ++j) x(0, j) += 1.5;
  const auto y2 = windowed_attention_block(Tensor::constant(x), ps, "b.", cfg).value();
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_EQ(y1(cfg.window, j), y2(cfg.window, j));
    EXPECT_EQ(y1(9, j), y2(9, j));
  }
  EXPECT_NE(y1(1, 0), y2(1, 0));
}

TEST(Mixers, WindowAsLargeAsSequenceIsFullAttention) {
  auto cfg = small_mixer(MixerKind::kWindowedAttention);
  ParamStore ps;
  Rng rng(1);
  register_block(ps, "b.", cfg, rng);
  std::mt19937_64 g(3);
  const Tensor x = Tensor::constant(random_matrix(g, 7, 8));
  const auto full = windowed_attention(x, ps, "b.", 7, 2).value();
  const auto big = windowed_attention(x, ps, "b.", 1000, 2).value();
  // Reference: one dense softmax per head with no windowing helpers.
  const Matrix q = linear(x, ps.get("b.attn.wq"), ps.get("b.attn.bq")).value();
  const Matrix k = linear(x, ps.get("b.attn.wk"), ps.get("b.attn.bk")).value();
  const Matrix v = linear(x, ps.get("b.attn.wv"), ps.get("b.attn.bv")).value();
  Matrix mixed(7, 8);
  for (std::size_t hd = 0; hd < 2; ++hd) {
    for (std::size_t i = 0; i < 7; ++i) {
      std::vector<double> s(7);
      double m = -1e300, z = 0;
      for (std::size_t t = 0; t < 7; ++t) {
        double dot = 0;
        for (std::size_t c = hd * 4; c < hd * 4 + 4; ++c) dot += q(i, c) * k(t, c);
        s[t] = dot / 2.0;
        m = std::max(m, s[t]);
      }
      for (auto& e : s) z += (e = std::exp(e - m));
      for (std::size_t c = hd * 4; c < hd * 4 + 4; ++c) {
        double acc = 0;
        for (std::size_t t = 0; t < 7; ++t) acc += s[t] / z * v(t, c);
        mixed(i, c) = acc;
      }
    }
  }
  const Matrix ref = linear(Tensor::constant(mixed), ps.get("b.attn.wo"), ps.get("b.attn.bo")).value();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(full.data[i], ref.data[i], 1e-9);
    EXPECT_EQ(full.data[i], big.data[i]);
  }
}

TEST(Mixers, SharedLmSingleWeightSet) {
  MixerConfig cfg = small_mixer(MixerKind::kFnet);
  cfg.n_blocks = 2;
  ParamStore ps;
  Rng rng(1);
  register_shared_lm(ps, cfg, rng);
  const std::size_t one = 2 * (2 * 8) + (8 * 6 + 6) + (6 * 8 + 8);
  EXPECT_EQ(ps.count("lm."), 2 * one);
  std::mt19937_64 g(3);
  const Tensor x = Tensor::constant(random_matrix(g, 6, 8));
  EXPECT_EQ(shared_lm(x, cfg, ps).value().data, shared_lm(x, cfg, ps).value().data);
}

TEST(Mixers, ConfigValidation) {
  MixerConfig c;
  c.window = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = MixerConfig{};
  c.n_attn_heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_mixer_kind("lstm"), ConfigError);
}

// ---------------------------------------------------------------- heads

TEST(Heads, DecodeBio) {
  const int bd = begin_label(EntityType::kDrug), id = inside_label(EntityType::kDrug);
  EXPECT_EQ(decode_labels({bd, id, 0}), (std::vector<TokenSpan>{{0, 2, EntityType::kDrug}}));
  EXPECT_EQ(decode_labels({0, id}), (std::vector<TokenSpan>{{1, 2, EntityType::kDrug}}));
  EXPECT_EQ(decode_labels({bd, bd}), (std::vector<TokenSpan>{{0, 1, EntityType::kDrug}, {1, 2, EntityType::kDrug}}));
  const int is = inside_label(EntityType::kStrength);
  EXPECT_EQ(decode_labels({bd, is}), (std::vector<TokenSpan>{{0, 1, EntityType::kDrug}, {1, 2, EntityType::kStrength}}));
}

TEST(Heads, ArgmaxTiesLowest) {
  const auto m = Matrix::from_rows({{1, 3, 3}, {0, 0, 0}});
  EXPECT_EQ(argmax_rows(m), (std::vector<int>{1, 0}));
}

TEST(Heads, DecodeRoundTripOnSynthetic) {
  SynthConfig cfg;
  cfg.n_docs = 4;
  auto corpus = synth_corpus(cfg);
  for (auto& d : corpus.docs) {
    annotate(d, corpus.vocab);
    Matrix logits(d.tokens.size(), kNumBioClasses);
    for (std::size_t i = 0; i < d.tokens.size(); ++i) logits(i, static_cast<std::size_t>(d.bio_labels[i])) = 5.0;
    EXPECT_EQ(decode_bio(logits).spans, d.gold_token_spans);
  }
}

TEST(Heads, SelectivePool) {
  std::mt19937_64 g(1);
  const Tensor e = Tensor::constant(random_matrix(g, 8, 3));
  const std::vector<TokenSpan> spans{{2, 3, EntityType::kDrug}, {5, 7, EntityType::kStrength}};
  const auto sets = partition_spans(spans);
  const auto [q, k] = selective_pool(e, sets);
  ASSERT_EQ(q.rows(), 1u);
  ASSERT_EQ(k.rows(), 1u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(q.at(0, j), e.at(2, j));
    EXPECT_EQ(k.at(0, j), e.at(5, j));
  }
  EXPECT_TRUE(partition_spans({{1, 2, EntityType::kRoute}}).h.empty());
}

TEST(Heads, DistanceMatrix) {
  const auto d = distance_matrix({2, 10}, {5, 7});
  EXPECT_EQ(d.data, (Buffer{3, 5, 5, 3}));
  EXPECT_EQ(distance_matrix({4}, {4}).data, (Buffer{0}));
  EXPECT_EQ(distance_matrix({0}, {13989}).data, (Buffer{13989}));
}

TEST(Heads, DistanceBiasTerms) {
  Tensor alpha = Tensor::parameter(Matrix(kNumHeads, 3));
  alpha.mutable_value()(2, 0) = 1.0;
  const auto psi = distance_bias(Tensor::constant(Matrix(1, 1)), alpha, 2, Matrix::from_rows({{2}}));
  EXPECT_EQ(psi.item(), 4.0);
  alpha.mutable_value()(2, 0) = 0.0;
  alpha.mutable_value()(2, 2) = 5.0;
  const auto a = Matrix::from_rows({{1, -2}, {0.5, 3}});
  const auto psi2 = distance_bias(Tensor::constant(a), alpha, 2, Matrix::from_rows({{7, 1}, {0, 100}}));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(psi2.value().data[i], a.data[i] + 5.0);
}

TEST(Heads, RelationScoresGradients) {
  ParamStore ps;
  Rng rng(3);
  HeadConfig hc{6, 4, 2};
  register_relation_heads(ps, hc, rng);
  jitter(ps, 9);
  std::mt19937_64 g(2);
  const Tensor q = Tensor::parameter(random_matrix(g, 3, 6));
  const Tensor k = Tensor::parameter(random_matrix(g, 4, 6));
  const Matrix dist = Matrix::from_rows({{1, 2, 0.5, 3}, {0.3, 0.1, 1, 2}, {2, 2, 1, 0}});
  std::vector<Matrix> w;
  for (int j = 0; j < kNumHeads; ++j) w.push_back(random_matrix(g, 3, 4));
  auto f = [&] {
    const auto psi = relation_scores(q, k, dist, ps, hc);
    Tensor s = project(psi[0], w[0]);
    for (int j = 1; j < kNumHeads; ++j) s = add(s, project(psi[static_cast<std::size_t>(j)], w[static_cast<std::size_t>(j)]));
    return s;
  };
  std::vector<Tensor> params{q, k};
  for (auto& [n, t] : ps.entries()) params.push_back(t);
  EXPECT_LT(grad_check(f, params).max_rel_error, 1e-5);
}

TEST(Heads, AlphaZeroLeavesScoresUndistanced) {
  ParamStore ps;
  Rng rng(3);
  HeadConfig hc{6, 6, 1};
  register_relation_heads(ps, hc, rng);
  std::mt19937_64 g(2);
  const Tensor q = Tensor::constant(random_matrix(g, 2, 6));
  const Tensor k = Tensor::constant(random_matrix(g, 3, 6));
  const auto psi = relation_scores(q, k, Matrix::from_rows({{10, 20, 30}, {40, 50, 60}}), ps, hc);
  for (int j = 0; j < kNumHeads; ++j) {
    const auto a = matmul_nt(head_map(q, ps, 'q', j, 1), head_map(k, ps, 'k', j, 1)).value();
    EXPECT_EQ(psi[static_cast<std::size_t>(j)].value().data, a.data);
  }
}

TEST(Heads, ReLossUniformColumn) {
  std::vector<Tensor> psi;
  for (int j = 0; j < kNumHeads; ++j) psi.push_back(Tensor::constant(Matrix(2, 3, 0.7)));
  const double got = re_loss(psi, {{1, 4, 0}}).item();
  EXPECT_NEAR(got, std::log(2.0) / (2.0 * 3.0), 1e-15);
  EXPECT_EQ(re_loss(psi, {}).item(), 0.0);
  EXPECT_EQ(re_loss({}, {}).item(), 0.0);
}

TEST(Heads, NerLossUniformAndMargin) {
  EXPECT_NEAR(ner_loss(Tensor::constant(Matrix(3, kNumBioClasses)), {0, 5, 18}).item(), std::log(19.0), 1e-12);
  double prev = 1e9;
  for (double m : {0.0, 1.0, 5.0, 20.0, 50.0}) {
    Matrix l(1, kNumBioClasses);
    l(0, 3) = m;
    const double v = ner_loss(Tensor::constant(l), {3}).item();
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-18);
}

TEST(Heads, JointLossIsSum) {
  const auto l = joint_loss(Tensor::constant(Matrix(1, 1, 2.0)), Tensor::constant(Matrix(1, 1, 0.5)));
  EXPECT_EQ(l.item(), 2.5);
}

TEST(Heads, PredictRelations) {
  const auto col = [](std::vector<double> v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
  };
  std::vector<Matrix> psi(kNumHeads, col({0, 0}));
  psi[0] = col({0.1, 3.2});
  auto r = predict_relations(psi, {EntityType::kStrength});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].drug, 1u);
  EXPECT_EQ(r[0].head, 0);
  psi[0] = col({2.0, 2.0});
  EXPECT_EQ(predict_relations(psi, {EntityType::kStrength})[0].drug, 0u);
  std::vector<Matrix> single(kNumHeads, Matrix(1, 2, -4.0));
  for (const auto& x : predict_relations(single, {EntityType::kRoute, EntityType::kAde})) EXPECT_EQ(x.drug, 0u);
  // shifting a column leaves the choice unchanged
  psi[0] = col({0.1, 3.2});
  auto shifted = psi;
  shifted[0] = col({100.1, 103.2});
  EXPECT_EQ(predict_relations(shifted, {EntityType::kStrength})[0].drug, 1u);
  EXPECT_TRUE(predict_relations(std::vector<Matrix>(kNumHeads, Matrix(0, 1)), {EntityType::kStrength}).empty());
}

// ---------------------------------------------------------------- model

namespace {

ModelConfig tiny_config(MixerKind kind = MixerKind::kFnet) {
  ModelConfig mc;
  mc.mixer = small_mixer(kind, 6, 5);
  mc.mixer.n_blocks = 1;
  mc.key_dim = 4;
  return mc;
}

Instance toy_instance() {
  Instance in;
  in.ids = {1, 3, 4, 0, 2, 5, 3, 1, 0, 4, 2, 5};
  in.labels.assign(12, 0);
  in.spans = {{1, 2, EntityType::kDrug}, {3, 5, EntityType::kStrength}, {6, 7, EntityType::kDrug},
              {8, 9, EntityType::kRoute}, {10, 11, EntityType::kAde}};
  for (const auto& s : in.spans) {
    in.labels[s.begin] = begin_label(s.type);
    for (auto t = s.begin + 1; t < s.end; ++t) in.labels[t] = inside_label(s.type);
  }
  in.relations = {{1, 0, 0}, {3, 2, 4}, {4, 2, 7}};
  return in;
}

}  // namespace

TEST(Model, EndToEndGradient) {
  JnrfModel m(tiny_config(), random_table(6, 4, 2));
  jitter(m.params(), 3);
  const auto in = toy_instance();
  std::vector<Tensor> params;
  for (auto& [n, t] : m.params().entries()) params.push_back(t);
  const auto r = grad_check([&] { return m.loss(in).total; }, params);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(Model, SharedGradientIsSumOfLossGradients) {
  JnrfModel m(tiny_config(), random_table(6, 4, 2));
  jitter(m.params(), 3);
  const auto in = toy_instance();
  auto grads = [&](int which) {
    m.params().zero_grad();
    const auto lp = m.loss(in);
    backward(which == 0 ? lp.ner : which == 1 ? lp.re : lp.total);
    return m.params().get("lm.0.ffn.w1").grad();
  };
  const Matrix gn = grads(0), gr = grads(1), gt = grads(2);
  for (std::size_t i = 0; i < gt.size(); ++i) EXPECT_NEAR(gt.data[i], gn.data[i] + gr.data[i], 1e-12);
}

TEST(Model, NoRelationsMeansNerOnly) {
  JnrfModel m(tiny_config(), random_table(6, 4, 2));
  auto in = toy_instance();
  for (auto& s : in.spans) s.type = EntityType::kRoute;
  const auto lp = m.loss(in);
  EXPECT_EQ(lp.re.item(), 0.0);
  EXPECT_EQ(lp.total.item(), lp.ner.item());
}

TEST(Model, FrozenTableExcluded) {
  JnrfModel m(tiny_config(), random_table(6, 4, 2));
  for (const auto& [n, t] : m.trainable()) EXPECT_NE(n.rfind("emb", 0), 0u);
  auto frozen = tiny_config();
  frozen.alpha_trainable = false;
  JnrfModel m2(frozen, random_table(6, 4, 2));
  EXPECT_EQ(m2.trainable().size() + 1, m.trainable().size());
}

TEST(Model, PredictProducesOneRelationPerAttribute) {
  JnrfModel m(tiny_config(), random_table(6, 4, 2));
  const auto p = m.predict(toy_instance().ids);
  std::size_t attrs = 0, drugs = 0;
  for (const auto& s : p.spans) (s.type == EntityType::kDrug ? drugs : attrs)++;
  EXPECT_EQ(p.relations.size(), drugs ? attrs : 0u);
}

TEST(Model, RelationCostIndependentOfLength) {
  JnrfModel m(tiny_config(), random_table(6, 4, 2));
  const std::vector<TokenSpan> spans{{1, 2, EntityType::kDrug}, {3, 4, EntityType::kStrength}, {5, 6, EntityType::kDrug}};
  std::uint64_t counts[2];
  for (int i = 0; i < 2; ++i) {
    std::vector<int> ids(i == 0 ? 16 : 1024, 1);
    const Tensor e2 = m.encode(ids);
    MulCounter::reset();
    m.relation_forward(e2, spans);
    counts[i] = MulCounter::get(OpCategory::kRelation);
  }
  EXPECT_GT(counts[0], 0u);
  EXPECT_EQ(counts[0], counts[1]);
}

TEST(Model, SentenceInstancesDropCrossingRelations) {
  SynthConfig cfg;
  cfg.n_docs = 2;
  cfg.profile = RelationProfile::parse("0:1,-1:1");
  cfg.entity_density = 0.12;
  auto corpus = synth_corpus(cfg);
  for (auto& d : corpus.docs) {
    annotate(d, corpus.vocab);
    const auto whole = document_instance(d);
    std::size_t tokens = 0, rels = 0;
    for (const auto& s : sentence_instances(d)) {
      tokens += s.ids.size();
      rels += s.relations.size();
      EXPECT_EQ(s.ids.size(), s.labels.size());
    }
    EXPECT_EQ(tokens, whole.ids.size());
    EXPECT_LT(rels, whole.relations.size());
    EXPECT_GT(rels, 0u);
  }
}
