#pragma once

// Timing, memory and multiply-count measurements of one training step
// (forward, both losses, backward) across document lengths.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <new>
#include <string>
#include <vector>

#include "jnrf/annotate.hpp"
#include "jnrf/counters.hpp"
#include "jnrf/memory.hpp"
#include "jnrf/model.hpp"
#include "jnrf/synth.hpp"

namespace jnrf {

inline constexpr std::size_t kBenchWindow = 512;

struct BenchSystem {
  std::string name;
  ModelConfig model;
};

/// jnrf: Fourier mixing over the whole document. wjnrf: Fourier mixing per
/// 512-token window. wattn: self-attention per 512-token window. attn:
/// self-attention over the whole document.
inline BenchSystem preset_system(const std::string& name, const MixerConfig& base) {
  BenchSystem s{name, {}};
  s.model.mixer = base;
  auto& m = s.model.mixer;
  if (name == "jnrf") {
    m.kind = MixerKind::kFnet;
    m.fnet_window = 0;
  } else if (name == "wjnrf") {
    m.kind = MixerKind::kFnet;
    m.fnet_window = kBenchWindow;
  } else if (name == "wattn") {
    m.kind = MixerKind::kWindowedAttention;
    m.window = kBenchWindow;
  } else if (name == "attn") {
    m.kind = MixerKind::kWindowedAttention;
    m.window = kMaxSynthTokens;
  } else if (name == "mlp") {
    m.kind = MixerKind::kMlp;
  } else {
    throw ConfigError("unknown bench system '" + name + "' (jnrf, wjnrf, wattn, attn, mlp)");
  }
  s.model.key_dim = base.d;
  return s;
}

struct BenchRow {
  std::size_t n = 0;
  double seconds = 0.0;          // median over trials
  std::size_t peak_bytes = 0;    // allocator high-water mark during a step
  std::uint64_t multiplies = 0;  // mixer + relation scoring
  std::uint64_t mixer_multiplies = 0;
  std::uint64_t relation_multiplies = 0;
  bool ok = true;
  std::string error;
};

struct BenchResult {
  std::string system;
  std::vector<BenchRow> rows;
};

struct BenchOptions {
  std::vector<std::size_t> lengths{512, 1024, 2048, 4096};
  std::size_t trials = 3;
  std::uint64_t seed = 13;
  double entity_density = 0.1;
};

/// A synthetic annotated instance of exactly n tokens; the same seed and n
/// give the same instance for every system.
inline Instance bench_instance(const Vocab& vocab, std::size_t n, const BenchOptions& opt) {
  Rng rng(opt.seed * 1000003ULL + n);
  Document d = synth_document(vocab, rng, n, opt.entity_density, default_relation_profile(), "bench");
  annotate(d, vocab);
  return document_instance(d);
}

inline BenchRow bench_length(JnrfModel& model, const Instance& in, std::size_t trials) {
  BenchRow row;
  row.n = in.ids.size();
  auto step = [&] {
    const LossParts lp = model.loss(in);
    backward(lp.total);
  };
  try {
    step();  // warm-up
    std::vector<double> times;
    for (std::size_t t = 0; t < trials; ++t) {
      model.params().zero_grad();
      MulCounter::reset();
      MemoryStats::reset_peak();
      const std::size_t base = MemoryStats::current();
      const auto t0 = std::chrono::steady_clock::now();
      step();
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      row.peak_bytes = std::max(row.peak_bytes, MemoryStats::peak() - base);
      row.mixer_multiplies = MulCounter::get(OpCategory::kMixer);
      row.relation_multiplies = MulCounter::get(OpCategory::kRelation);
      row.multiplies = row.mixer_multiplies + row.relation_multiplies;
    }
    std::sort(times.begin(), times.end());
    row.seconds = times[times.size() / 2];
  } catch (const std::bad_alloc&) {
    row.ok = false;
    row.error = "out of memory";
  } catch (const Error& e) {
    row.ok = false;
    row.error = e.what();
  }
  model.params().zero_grad();
  return row;
}

inline BenchResult bench_system(const BenchSystem& sys, const Vocab& vocab, const BenchOptions& opt) {
  if (opt.trials < 3) throw ConfigError("bench needs at least 3 trials");
  if (!std::is_sorted(opt.lengths.begin(), opt.lengths.end())) throw ConfigError("bench lengths must be ascending");
  JnrfModel model(sys.model, random_table(vocab.size(), sys.model.mixer.d, opt.seed));
  BenchResult res{sys.name, {}};
  for (std::size_t n : opt.lengths) res.rows.push_back(bench_length(model, bench_instance(vocab, n, opt), opt.trials));
  return res;
}

/// system<TAB>n<TAB>seconds<TAB>bytes<TAB>multiplies
inline std::string bench_tsv(const std::vector<BenchResult>& results) {
  std::string out;
  char buf[256];
  for (const auto& r : results)
    for (const auto& row : r.rows) {
      if (row.ok) {
        std::snprintf(buf, sizeof buf, "%s\t%zu\t%.6f\t%zu\t%llu\n", r.system.c_str(), row.n, row.seconds, row.peak_bytes,
                      static_cast<unsigned long long>(row.multiplies));
      } else {
        std::snprintf(buf, sizeof buf, "%s\t%zu\tFAILED\t%s\t-\n", r.system.c_str(), row.n, row.error.c_str());
      }
      out += buf;
    }
  return out;
}

/// Number of overlapping windows a sliding window of `window` tokens needs.
inline std::size_t overlapping_windows(std::size_t n, std::size_t window = kBenchWindow) {
  return n <= window ? 1 : n - window + 1;
}

/// Ratios of each system to the first one, per length.
inline std::string compare_report(const std::vector<BenchResult>& results) {
  if (results.size() < 2) throw ConfigError("comparison needs at least two systems");
  const BenchResult& ref = results.front();
  auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-8s %7s %10s %10s %10s %12s\n", "system", "n", "time", "memory", "mults",
                "overlap_win");
  out += buf;
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const BenchRow& row = r.rows[i];
      if (i >= ref.rows.size() || ref.rows[i].n != row.n) throw ConfigError("systems were run over different lengths");
      const BenchRow& base = ref.rows[i];
      if (!row.ok || !base.ok) {
        std::snprintf(buf, sizeof buf, "%-8s %7zu %10s %10s %10s %12zu\n", r.system.c_str(), row.n, "failed", "-", "-",
                      overlapping_windows(row.n));
      } else {
        std::snprintf(buf, sizeof buf, "%-8s %7zu %10.3f %10.3f %10.3f %12zu\n", r.system.c_str(), row.n,
                      ratio(row.seconds, base.seconds),
                      ratio(static_cast<double>(row.peak_bytes), static_cast<double>(base.peak_bytes)),
                      ratio(static_cast<double>(row.multiplies), static_cast<double>(base.multiplies)),
                      overlapping_windows(row.n));
      }
      out += buf;
    }
  }
  return out;
}

}  // namespace jnrf
