#pragma once

// Run configuration as a line-oriented "key = value" file. Blank lines and
// lines starting with '#' are ignored; unknown keys are rejected.

#include <charconv>
#include <cstdint>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "jnrf/bench.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/eval.hpp"
#include "jnrf/model.hpp"
#include "jnrf/synth.hpp"
#include "jnrf/train.hpp"

namespace jnrf {

struct RunConfig {
  std::uint64_t seed = 13;

  // synth
  std::size_t n_train = 64;
  std::size_t n_dev = 16;
  std::size_t n_test = 16;
  std::size_t min_tokens = 200;
  std::size_t max_tokens = 2000;
  double entity_density = 0.2;
  RelationProfile relation_profile = default_relation_profile();

  // paths; empty = derived from out_dir
  std::string out_dir = "run";
  std::string train_dir;
  std::string dev_dir;
  std::string test_dir;
  std::string vocab;
  std::string embeddings;  // empty = seeded random table
  std::string checkpoint;

  ModelConfig model;
  std::size_t embedding_dim = 64;
  TrainConfig train;

  // bench
  std::vector<std::string> bench_systems{"jnrf", "wjnrf", "wattn"};
  std::vector<std::size_t> bench_lengths{512, 1024, 2048, 4096};
  std::size_t bench_trials = 3;

  MatchMode match_mode = MatchMode::kLenient;

  std::string train_path() const { return train_dir.empty() ? out_dir + "/corpus/train" : train_dir; }
  std::string dev_path() const { return dev_dir.empty() ? out_dir + "/corpus/dev" : dev_dir; }
  std::string test_path() const { return test_dir.empty() ? out_dir + "/corpus/test" : test_dir; }
  std::string vocab_path() const { return vocab.empty() ? out_dir + "/corpus/vocab.txt" : vocab; }
  std::string checkpoint_path() const { return checkpoint.empty() ? out_dir + "/model.ckpt" : checkpoint; }

  void validate() const {
    model.mixer.validate();
    train.validate();
    relation_profile.validate();
    if (embedding_dim == 0 || embedding_dim % 2 != 0) throw ConfigError("embedding_dim must be even and >= 2");
    if (model.key_dim == 0 || model.head_depth == 0) throw ConfigError("key_dim and head_depth must be >= 1");
    if (n_train == 0) throw ConfigError("n_train must be >= 1");
    if (bench_trials < 3) throw ConfigError("bench_trials must be >= 3");
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v[0] == '-') throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto part : split(v, ',')) {
    std::string p = trim(std::string(part));
    if (!p.empty()) out.push_back(std::move(p));
  }
  return out;
}

// Shortest text that parses back to the same double.
inline std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, std::string>) {
      out += v[i];
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

struct ConfigField {
  const char* key;
  const char* doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define JNRF_UINT(KEY, DOC, MEMBER)                                                      \
  ConfigField {                                                                          \
    KEY, DOC, [](const RunConfig& c) { return std::to_string(c.MEMBER); },               \
        [](RunConfig& c, const std::string& v) {                                         \
          c.MEMBER = static_cast<decltype(c.MEMBER)>(parse_uint(KEY, v));                \
        }                                                                                \
  }
#define JNRF_DOUBLE(KEY, DOC, MEMBER)                                                                     \
  ConfigField {                                                                                           \
    KEY, DOC, [](const RunConfig& c) { return num(c.MEMBER); },                                           \
        [](RunConfig& c, const std::string& v) { c.MEMBER = parse_double(KEY, v); }                       \
  }
#define JNRF_STRING(KEY, DOC, MEMBER)                                                                     \
  ConfigField {                                                                                           \
    KEY, DOC, [](const RunConfig& c) { return c.MEMBER; }, [](RunConfig& c, const std::string& v) { c.MEMBER = v; } \
  }
#define JNRF_BOOL(KEY, DOC, MEMBER)                                                                       \
  ConfigField {                                                                                           \
    KEY, DOC, [](const RunConfig& c) { return std::string(c.MEMBER ? "true" : "false"); },                \
        [](RunConfig& c, const std::string& v) { c.MEMBER = parse_bool(KEY, v); }                         \
  }

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      JNRF_UINT("seed", "seed for generation, initialization and shuffling", seed),
      JNRF_UINT("n_train", "synthetic training documents", n_train),
      JNRF_UINT("n_dev", "synthetic dev documents", n_dev),
      JNRF_UINT("n_test", "synthetic test documents", n_test),
      JNRF_UINT("min_tokens", "shortest synthetic document", min_tokens),
      JNRF_UINT("max_tokens", "longest synthetic document", max_tokens),
      JNRF_DOUBLE("entity_density", "entity tokens per token in synthetic documents", entity_density),
      ConfigField{"relation_profile", "signed sentence distance weights, d:w,...",
                  [](const RunConfig& c) { return c.relation_profile.str(); },
                  [](RunConfig& c, const std::string& v) { c.relation_profile = RelationProfile::parse(v); }},
      JNRF_STRING("out_dir", "output directory", out_dir),
      JNRF_STRING("train_dir", "training corpus (default out_dir/corpus/train)", train_dir),
      JNRF_STRING("dev_dir", "dev corpus (default out_dir/corpus/dev)", dev_dir),
      JNRF_STRING("test_dir", "test corpus (default out_dir/corpus/test)", test_dir),
      JNRF_STRING("vocab", "vocabulary file (default out_dir/corpus/vocab.txt)", vocab),
      JNRF_STRING("embeddings", "token<TAB>vector file; empty for a seeded random table", embeddings),
      JNRF_STRING("checkpoint", "checkpoint file (default out_dir/model.ckpt)", checkpoint),
      ConfigField{"mixer", "fnet, mlp or windowed_attention",
                  [](const RunConfig& c) { return mixer_kind_name(c.model.mixer.kind); },
                  [](RunConfig& c, const std::string& v) { c.model.mixer.kind = parse_mixer_kind(v); }},
      JNRF_UINT("n_blocks", "mixer blocks", model.mixer.n_blocks),
      JNRF_UINT("d", "model width", model.mixer.d),
      JNRF_UINT("ffn_hidden", "feed-forward hidden width", model.mixer.ffn_hidden),
      JNRF_UINT("window", "attention window (windowed_attention)", model.mixer.window),
      JNRF_UINT("n_attn_heads", "attention heads (windowed_attention)", model.mixer.n_attn_heads),
      JNRF_UINT("fnet_window", "Fourier mixing window, 0 = whole document", model.mixer.fnet_window),
      JNRF_UINT("embedding_dim", "width of the frozen embedding table", embedding_dim),
      JNRF_UINT("key_dim", "relation head query/key width", model.key_dim),
      JNRF_UINT("head_depth", "linear layers per relation query/key map", model.head_depth),
      JNRF_BOOL("alpha_trainable", "learn the distance polynomial", model.alpha_trainable),
      JNRF_BOOL("teacher_forcing", "pool gold spans for the relation loss", model.teacher_forcing),
      ConfigField{"pooling", "first or mean",
                  [](const RunConfig& c) { return std::string(c.model.pooling == Pooling::kFirst ? "first" : "mean"); },
                  [](RunConfig& c, const std::string& v) {
                    if (v == "first") {
                      c.model.pooling = Pooling::kFirst;
                    } else if (v == "mean") {
                      c.model.pooling = Pooling::kMean;
                    } else {
                      throw ConfigError("pooling: expected first or mean, got '" + v + "'");
                    }
                  }},
      ConfigField{"granularity", "document, sentence or mixed",
                  [](const RunConfig& c) { return granularity_name(c.train.granularity); },
                  [](RunConfig& c, const std::string& v) { c.train.granularity = parse_granularity(v); }},
      JNRF_UINT("doc_accumulate", "documents per optimizer step", train.doc_accumulate),
      JNRF_UINT("sentence_batch", "sentences per optimizer step", train.sentence_batch),
      JNRF_UINT("epochs", "training epochs", train.epochs),
      JNRF_DOUBLE("lr", "Adam learning rate", train.adam.lr),
      JNRF_DOUBLE("beta1", "Adam beta1", train.adam.beta1),
      JNRF_DOUBLE("beta2", "Adam beta2", train.adam.beta2),
      JNRF_DOUBLE("eps", "Adam epsilon", train.adam.eps),
      ConfigField{"bench_systems", "comma list of jnrf, wjnrf, wattn, attn, mlp",
                  [](const RunConfig& c) { return join(c.bench_systems); },
                  [](RunConfig& c, const std::string& v) { c.bench_systems = split_list(v); }},
      ConfigField{"bench_lengths", "comma list of ascending document lengths",
                  [](const RunConfig& c) { return join(c.bench_lengths); },
                  [](RunConfig& c, const std::string& v) {
                    c.bench_lengths.clear();
                    for (const auto& p : split_list(v)) c.bench_lengths.push_back(parse_uint("bench_lengths", p));
                  }},
      JNRF_UINT("bench_trials", "timed trials per length (median reported)", bench_trials),
      ConfigField{"match", "lenient or strict",
                  [](const RunConfig& c) { return std::string(c.match_mode == MatchMode::kLenient ? "lenient" : "strict"); },
                  [](RunConfig& c, const std::string& v) {
                    if (v == "lenient") {
                      c.match_mode = MatchMode::kLenient;
                    } else if (v == "strict") {
                      c.match_mode = MatchMode::kStrict;
                    } else {
                      throw ConfigError("match: expected lenient or strict, got '" + v + "'");
                    }
                  }},
  };
  return fields;
}

#undef JNRF_UINT
#undef JNRF_DOUBLE
#undef JNRF_STRING
#undef JNRF_BOOL

}  // namespace detail

/// Sets one key; unknown keys and malformed values throw ConfigError.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : detail::config_fields()) {
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::size_t lineno = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++lineno;
    const std::string line = detail::trim(std::string(raw));
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    try {
      set_config_value(cfg, key, detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

/// Every key with its current value, one per line, in a fixed order. With
/// `docs` each key is preceded by a comment line.
inline std::string config_text(const RunConfig& cfg, bool docs = false) {
  std::string out;
  for (const auto& f : detail::config_fields()) {
    if (docs) out += std::string("# ") + f.doc + "\n";
    out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace jnrf
