#pragma once

// Named trainable parameters.

#include <cmath>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "jnrf/errors.hpp"
#include "jnrf/rng.hpp"
#include "jnrf/tensor.hpp"

namespace jnrf {

class ParamStore {
 public:
  /// Registers a parameter; names are unique and keep insertion order.
  Tensor add(const std::string& name, Matrix init) {
    if (index_.count(name)) throw ConfigError("duplicate parameter " + name);
    index_.emplace(name, entries_.size());
    entries_.push_back({name, Tensor::parameter(std::move(init))});
    return entries_.back().second;
  }

  /// Normal(0, 1/fan_in) weights.
  Tensor add_weight(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
    Matrix m(in, out);
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& v : m.data) v = rng.normal() * s;
    return add(name, std::move(m));
  }

  Tensor add_const(const std::string& name, std::size_t rows, std::size_t cols, double v) {
    return add(name, Matrix(rows, cols, v));
  }

  const Tensor& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter " + name);
    return entries_[it->second].second;
  }
  Tensor& get(const std::string& name) { return const_cast<Tensor&>(std::as_const(*this).get(name)); }
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }

  std::size_t size() const { return entries_.size(); }

  /// Total scalar count of parameters whose name starts with `prefix`.
  std::size_t count(const std::string& prefix = "") const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries_)
      if (name.rfind(prefix, 0) == 0) n += t.value().size();
    return n;
  }

  void zero_grad() {
    for (auto& [name, t] : entries_) t.clear_grad();
  }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace jnrf
