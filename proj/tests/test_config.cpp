#include <gtest/gtest.h>

#include <string>

#include "jnrf/config.hpp"

using namespace jnrf;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const RunConfig def;
  EXPECT_EQ(config_text(parse_config(config_text(def))), config_text(def));
  EXPECT_EQ(config_text(parse_config(config_text(def, true))), config_text(def));
}

TEST(Config, ValuesSurviveRoundTrip) {
  const RunConfig c = parse_config(
      "# comment\n"
      "seed = 7\n"
      "mixer = mlp\n"
      "lr = 0.0003\n"
      "entity_density = 0.15\n"
      "alpha_trainable = false\n"
      "granularity = mixed\n"
      "bench_lengths = 256, 1024\n"
      "bench_systems = jnrf,attn\n"
      "relation_profile = 0:0.5,1:0.5\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.model.mixer.kind, MixerKind::kMlp);
  EXPECT_EQ(c.train.adam.lr, 0.0003);
  EXPECT_FALSE(c.model.alpha_trainable);
  EXPECT_EQ(c.train.granularity, Granularity::kMixed);
  EXPECT_EQ(c.bench_lengths, (std::vector<std::size_t>{256, 1024}));
  EXPECT_EQ(c.bench_systems, (std::vector<std::string>{"jnrf", "attn"}));
  EXPECT_EQ(config_text(parse_config(config_text(c))), config_text(c));
  EXPECT_NE(config_text(c).find("entity_density = 0.15\n"), std::string::npos);
}

TEST(Config, ErrorsNameTheLine) {
  EXPECT_NE(error_of("seed = 1\nbogus = 3\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nbogus = 3\n").find("bogus"), std::string::npos);
  EXPECT_NE(error_of("seed 1\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("\n\nepochs = many\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("mixer = lstm\n"), "");
  EXPECT_NE(error_of("alpha_trainable = maybe\n"), "");
}

TEST(Config, ValidateRejectsBadSettings) {
  RunConfig c;
  c.model.mixer.n_attn_heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.train.epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, DefaultPaths) {
  RunConfig c;
  c.out_dir = "o";
  EXPECT_EQ(c.train_path(), "o/corpus/train");
  EXPECT_EQ(c.vocab_path(), "o/corpus/vocab.txt");
  EXPECT_EQ(c.checkpoint_path(), "o/model.ckpt");
  c.checkpoint = "x.ckpt";
  EXPECT_EQ(c.checkpoint_path(), "x.ckpt");
}
