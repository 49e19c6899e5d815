#pragma once

// Byte accounting for tensor storage. Every Matrix buffer goes through
// TrackingAllocator, so the high-water mark below is the allocator peak for
// all activations, gradients and parameters.

#include <atomic>
#include <cstddef>
#include <memory>
#include <new>

namespace jnrf {

class MemoryStats {
 public:
  static void on_alloc(std::size_t bytes) {
    const std::size_t now = current_().fetch_add(bytes) + bytes;
    std::size_t peak = peak_().load();
    while (now > peak && !peak_().compare_exchange_weak(peak, now)) {
    }
  }

  static void on_free(std::size_t bytes) { current_().fetch_sub(bytes); }

  static std::size_t current() { return current_().load(); }
  static std::size_t peak() { return peak_().load(); }

  /// Restart peak tracking from the current live byte count.
  static void reset_peak() { peak_().store(current_().load()); }

 private:
  static std::atomic<std::size_t>& current_() {
    static std::atomic<std::size_t> value{0};
    return value;
  }
  static std::atomic<std::size_t>& peak_() {
    static std::atomic<std::size_t> value{0};
    return value;
  }
};

template <typename T>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() noexcept = default;
  template <typename U>
  TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    T* p = std::allocator<T>{}.allocate(n);
    MemoryStats::on_alloc(n * sizeof(T));
    return p;
  }

  void deallocate(T* p, std::size_t n) noexcept {
    MemoryStats::on_free(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  template <typename U>
  bool operator==(const TrackingAllocator<U>&) const noexcept {
    return true;
  }
};

}  // namespace jnrf
