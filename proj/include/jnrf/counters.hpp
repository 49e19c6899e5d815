#pragma once

// Multiply counting for machine-independent complexity measurements.
// Kernels charge their multiplies to the category that is active on the
// calling thread; model code opens a CountScope around each sub-module.

#include <array>
#include <cstdint>

namespace jnrf {

enum class OpCategory : int { kOther = 0, kEmbedding, kMixer, kNerHead, kRelation, kCount };

class MulCounter {
 public:
  static void add(std::uint64_t n) { counts_()[static_cast<int>(active_())] += n; }

  static std::uint64_t get(OpCategory c) { return counts_()[static_cast<int>(c)]; }

  static std::uint64_t total() {
    std::uint64_t s = 0;
    for (auto v : counts_()) s += v;
    return s;
  }

  static void reset() { counts_().fill(0); }

  static OpCategory active() { return active_(); }

 private:
  friend class CountScope;
  using Counts = std::array<std::uint64_t, static_cast<int>(OpCategory::kCount)>;

  static Counts& counts_() {
    thread_local Counts c{};
    return c;
  }
  static OpCategory& active_() {
    thread_local OpCategory a = OpCategory::kOther;
    return a;
  }
};

class CountScope {
 public:
  explicit CountScope(OpCategory c) : saved_(MulCounter::active_()) { MulCounter::active_() = c; }
  ~CountScope() { MulCounter::active_() = saved_; }
  CountScope(const CountScope&) = delete;
  CountScope& operator=(const CountScope&) = delete;

 private:
  OpCategory saved_;
};

}  // namespace jnrf
