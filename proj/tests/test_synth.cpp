#include <gtest/gtest.h>

#include <filesystem>

#include "jnrf/annotate.hpp"
#include "jnrf/stats.hpp"
#include "jnrf/synth.hpp"

using namespace jnrf;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("jnrf_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(Synth, SameSeedSameBytes) {
  SynthConfig cfg;
  cfg.n_docs = 4;
  const auto a = temp_dir("synth_a"), b = temp_dir("synth_b");
  write_synth_corpus(a, synth_corpus(cfg));
  write_synth_corpus(b, synth_corpus(cfg));
  for (const auto& e : std::filesystem::directory_iterator(a)) {
    EXPECT_EQ(read_file(e.path()), read_file(b / e.path().filename())) << e.path();
  }
  cfg.seed = 14;
  EXPECT_NE(synth_corpus(cfg).docs[0].text, synth_corpus(SynthConfig{}).docs[0].text);
}

TEST(Synth, LengthsInRangeAndParseable) {
  SynthConfig cfg;
  cfg.n_docs = 3;
  cfg.min_tokens = 224;
  cfg.max_tokens = 13990;
  const auto corpus = synth_corpus(cfg);
  const auto dir = temp_dir("synth_range");
  write_synth_corpus(dir, corpus);
  auto docs = read_brat_dir(dir);
  ASSERT_EQ(docs.size(), 3u);
  corpus.vocab.save(dir.parent_path() / "jnrf_test_vocab.txt");
  const auto vocab = Vocab::load(dir.parent_path() / "jnrf_test_vocab.txt");
  for (auto& d : docs) {
    annotate(d, vocab);
    EXPECT_GE(d.tokens.size(), 224u);
    EXPECT_LE(d.tokens.size(), 13990u);
    for (const auto& t : d.tokens) EXPECT_NE(t.vocab_id, vocab.unk_id()) << t.surface;
  }
}

TEST(Synth, ExactTokenCount) {
  const auto vocab = synth_vocab();
  for (std::size_t n : {16u, 17u, 32u, 512u, 4096u}) {
    Rng rng(n);
    auto d = synth_document(vocab, rng, n, 0.2, default_relation_profile(), "x");
    annotate(d, vocab);
    EXPECT_EQ(d.tokens.size(), n);
  }
}

TEST(Synth, ParseReproducesGold) {
  SynthConfig cfg;
  cfg.n_docs = 5;
  const auto corpus = synth_corpus(cfg);
  for (const auto& g : corpus.docs) {
    const auto p = parse_brat(g.doc_id, g.text, write_ann(g.text, g.gold_entities, g.gold_relations));
    ASSERT_EQ(p.gold_entities.size(), g.gold_entities.size());
    for (std::size_t i = 0; i < p.gold_entities.size(); ++i) {
      EXPECT_EQ(p.gold_entities[i].id, g.gold_entities[i].id);
      EXPECT_EQ(p.gold_entities[i].type, g.gold_entities[i].type);
      EXPECT_EQ(p.gold_entities[i].start, g.gold_entities[i].start);
      EXPECT_EQ(p.gold_entities[i].end, g.gold_entities[i].end);
      EXPECT_EQ(p.gold_entities[i].surface, g.gold_entities[i].surface);
    }
    ASSERT_EQ(p.gold_relations.size(), g.gold_relations.size());
    for (std::size_t i = 0; i < p.gold_relations.size(); ++i) {
      EXPECT_EQ(p.gold_relations[i].type, g.gold_relations[i].type);
      EXPECT_EQ(p.gold_relations[i].arg1, g.gold_relations[i].arg1);
      EXPECT_EQ(p.gold_relations[i].arg2, g.gold_relations[i].arg2);
    }
  }
}

TEST(Synth, IntraSentenceProfile) {
  SynthConfig cfg;
  cfg.n_docs = 6;
  cfg.profile = RelationProfile::parse("0:1");
  const auto corpus = synth_corpus(cfg);
  const auto dir = temp_dir("synth_intra");
  write_synth_corpus(dir, corpus);
  std::size_t total = 0, intra = 0;
  for (auto& d : read_brat_dir(dir)) {
    const auto starts = sentence_char_starts(d.text);
    for (const auto& r : d.gold_relations) {
      ++total;
      intra += sentence_of_offset(starts, d.gold_entities[r.arg1].start) ==
               sentence_of_offset(starts, d.gold_entities[r.arg2].start);
    }
  }
  ASSERT_GT(total, 50u);
  EXPECT_GE(static_cast<double>(intra), 0.95 * static_cast<double>(total));
}

TEST(Synth, InterSentenceDistancesFollowProfile) {
  SynthConfig cfg;
  cfg.n_docs = 6;
  cfg.profile = RelationProfile::parse("-2:1");
  cfg.entity_density = 0.1;  // gap sentences dilute events
  for (auto d : synth_corpus(cfg).docs) {
    const auto starts = sentence_char_starts(d.text);
    for (const auto& r : d.gold_relations) {
      const long sd = static_cast<long>(sentence_of_offset(starts, d.gold_entities[r.arg2].start)) -
                      static_cast<long>(sentence_of_offset(starts, d.gold_entities[r.arg1].start));
      EXPECT_EQ(sd, -2);
    }
  }
}

TEST(Synth, DensityTracked) {
  SynthConfig cfg;
  cfg.n_docs = 3;
  cfg.entity_density = 0.15;
  auto corpus = synth_corpus(cfg);
  for (auto& d : corpus.docs) {
    annotate(d, corpus.vocab);
    std::size_t inside = 0;
    for (int l : d.bio_labels) inside += l != kOutsideLabel;
    EXPECT_NEAR(static_cast<double>(inside) / static_cast<double>(d.tokens.size()), 0.15, 0.05);
  }
}

TEST(Synth, Rejections) {
  SynthConfig cfg;
  cfg.entity_density = 0.9;
  EXPECT_THROW(synth_corpus(cfg), GenerationError);
  cfg = SynthConfig{};
  cfg.min_tokens = 8;
  EXPECT_THROW(synth_corpus(cfg), GenerationError);
  cfg = SynthConfig{};
  cfg.max_tokens = 40000;
  EXPECT_THROW(synth_corpus(cfg), GenerationError);
  EXPECT_THROW(RelationProfile::parse("0:1,9:1"), ConfigError);
  EXPECT_THROW(RelationProfile::parse("zero"), ConfigError);
}

TEST(Synth, ZeroDensityHasNoEntities) {
  SynthConfig cfg;
  cfg.n_docs = 2;
  cfg.entity_density = 0.0;
  for (const auto& d : synth_corpus(cfg).docs) EXPECT_TRUE(d.gold_entities.empty());
}

TEST(Stats, Counts) {
  Document d;
  d.gold_entities = {{"T1", EntityType::kDrug, 0, 1, "a"}, {"T2", EntityType::kDrug, 2, 3, "b"},
                     {"T3", EntityType::kStrength, 4, 5, "c"}};
  d.tokens.resize(100);
  const auto s = corpus_stats({d});
  EXPECT_EQ(s.entities[static_cast<int>(EntityType::kDrug)], 2u);
  EXPECT_EQ(s.entities[static_cast<int>(EntityType::kStrength)], 1u);
  EXPECT_EQ(s.entity_total(), 3u);
}

TEST(Stats, Lengths) {
  Document a, b;
  a.tokens.resize(100);
  b.tokens.resize(300);
  const auto l = corpus_stats({a, b}).length_stats();
  EXPECT_EQ(l.count, 2u);
  EXPECT_DOUBLE_EQ(l.mean, 200.0);
  EXPECT_EQ(l.min, 100u);
  EXPECT_EQ(l.max, 300u);
  EXPECT_NEAR(l.std, 141.4213562373095, 1e-9);
}

TEST(Stats, EmptyCorpusRejected) { EXPECT_THROW(corpus_stats({}), DataError); }

TEST(Stats, RenderedTables) {
  Document a;
  a.tokens.resize(10);
  a.gold_entities = {{"T1", EntityType::kDrug, 0, 1, "a"}};
  const auto text = render_stats({{"Train", corpus_stats({a})}, {"Test", corpus_stats({a})}});
  EXPECT_NE(text.find("Drug"), std::string::npos);
  EXPECT_NE(text.find("2 (100)"), std::string::npos);
  EXPECT_NE(text.find("ADE-Drug"), std::string::npos);
  EXPECT_NE(text.find("Mean"), std::string::npos);
}
