#include <gtest/gtest.h>

#include "jnrf/bench.hpp"

using namespace jnrf;

namespace {

MixerConfig small_base() {
  MixerConfig m;
  m.d = 16;
  m.ffn_hidden = 16;
  m.n_blocks = 1;
  return m;
}

BenchOptions quick(std::vector<std::size_t> lengths) {
  BenchOptions o;
  o.lengths = std::move(lengths);
  o.trials = 3;
  return o;
}

}  // namespace

TEST(Bench, Presets) {
  const auto base = small_base();
  EXPECT_EQ(preset_system("jnrf", base).model.mixer.fnet_window, 0u);
  EXPECT_EQ(preset_system("wjnrf", base).model.mixer.fnet_window, 512u);
  EXPECT_EQ(preset_system("wattn", base).model.mixer.kind, MixerKind::kWindowedAttention);
  EXPECT_EQ(preset_system("attn", base).model.mixer.window, kMaxSynthTokens);
  EXPECT_THROW(preset_system("bilstm", base), ConfigError);
}

TEST(Bench, WindowCounts) {
  EXPECT_EQ(window_segments(4045, kBenchWindow).size(), 8u);
  EXPECT_EQ(overlapping_windows(4045), 3534u);
  EXPECT_EQ(overlapping_windows(300), 1u);
}

TEST(Bench, CountsAreDeterministic) {
  const Vocab vocab = synth_vocab();
  const auto sys = preset_system("jnrf", small_base());
  const auto a = bench_system(sys, vocab, quick({64, 256}));
  const auto b = bench_system(sys, vocab, quick({64, 256}));
  ASSERT_EQ(a.rows.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(a.rows[i].ok);
    EXPECT_GT(a.rows[i].multiplies, 0u);
    EXPECT_EQ(a.rows[i].multiplies, b.rows[i].multiplies);
    EXPECT_GT(a.rows[i].peak_bytes, 0u);
  }
}

TEST(Bench, FnetCountsGrowNearLinearly) {
  const Vocab vocab = synth_vocab();
  const auto r = bench_system(preset_system("jnrf", small_base()), vocab, quick({4096, 8192}));
  const double ratio = static_cast<double>(r.rows[1].mixer_multiplies) / static_cast<double>(r.rows[0].mixer_multiplies);
  EXPECT_LT(ratio, 2.6);
  EXPECT_GT(ratio, 2.0);
}

TEST(Bench, AttentionCountsGrowQuadratically) {
  const Vocab vocab = synth_vocab();
  const auto r = bench_system(preset_system("attn", small_base()), vocab, quick({512, 1024}));
  const double ratio = static_cast<double>(r.rows[1].mixer_multiplies) / static_cast<double>(r.rows[0].mixer_multiplies);
  EXPECT_GT(ratio, 3.0);
}

TEST(Bench, IdenticalSystemsCompareAsOne) {
  BenchResult a{"x", {}};
  BenchRow row;
  row.n = 4045;
  row.seconds = 2.0;
  row.peak_bytes = 100;
  row.multiplies = 10;
  a.rows.push_back(row);
  BenchResult b = a;
  b.system = "y";
  const std::string rep = compare_report({a, b});
  EXPECT_NE(rep.find("y           4045      1.000      1.000      1.000         3534"), std::string::npos) << rep;
  EXPECT_THROW(compare_report({a}), ConfigError);
  EXPECT_EQ(bench_tsv({a}), "x\t4045\t2.000000\t100\t10\n");
}

TEST(Bench, Rejections) {
  const Vocab vocab = synth_vocab();
  auto o = quick({256, 64});
  EXPECT_THROW(bench_system(preset_system("jnrf", small_base()), vocab, o), ConfigError);
  o = quick({64});
  o.trials = 2;
  EXPECT_THROW(bench_system(preset_system("jnrf", small_base()), vocab, o), ConfigError);
}
