#pragma once

// Dense row-major 2-D tensors with a reverse-mode gradient tape.
//
// A Tensor is a cheap handle to a graph node. Operations (see ops.hpp) create
// new nodes that remember their parents and a backward rule whenever one of
// the inputs requires a gradient. GradTape linearizes the graph reachable from
// a scalar root into topological order and replays the rules in reverse.
//
// Leaves (parameters) accumulate gradients across backward passes; gradients
// of intermediate nodes are rebuilt from zero on every pass.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "jnrf/errors.hpp"
#include "jnrf/memory.hpp"

namespace jnrf {

using Buffer = std::vector<double, TrackingAllocator<double>>;

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Buffer data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows_in) {
    Matrix m;
    m.rows = rows_in.size();
    m.cols = m.rows ? rows_in.begin()->size() : 0;
    m.data.reserve(m.rows * m.cols);
    for (const auto& r : rows_in) {
      if (r.size() != m.cols) throw DimensionError("from_rows: ragged rows");
      m.data.insert(m.data.end(), r.begin(), r.end());
    }
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

inline std::string shape_str(std::size_t r, std::size_t c) {
  return "[" + std::to_string(r) + "x" + std::to_string(c) + "]";
}
inline std::string shape_str(const Matrix& m) { return shape_str(m.rows, m.cols); }

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents that require grad.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return parents.empty(); }

  Matrix& ensure_grad() {
    if (grad.rows != value.rows || grad.cols != value.cols || grad.data.size() != value.data.size()) {
      grad = Matrix(value.rows, value.cols);
    }
    return grad;
  }
};

inline bool& grad_enabled_flag() {
  thread_local bool enabled = true;
  return enabled;
}

}  // namespace detail

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard() : saved_(detail::grad_enabled_flag()) { detail::grad_enabled_flag() = false; }
  ~NoGradGuard() { detail::grad_enabled_flag() = saved_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool saved_;
};

inline bool grad_enabled() { return detail::grad_enabled_flag(); }

class Tensor {
 public:
  Tensor() : node_(std::make_shared<detail::Node>()) {}

  /// A value that never receives a gradient.
  static Tensor constant(Matrix m) {
    Tensor t;
    t.node_->value = std::move(m);
    return t;
  }

  /// A trainable leaf.
  static Tensor parameter(Matrix m) {
    Tensor t;
    t.node_->value = std::move(m);
    t.node_->requires_grad = true;
    return t;
  }

  std::size_t rows() const { return node_->value.rows; }
  std::size_t cols() const { return node_->value.cols; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  double item() const {
    if (rows() != 1 || cols() != 1) throw DimensionError("item() on " + shape_str(value()));
    return node_->value.data[0];
  }
  double at(std::size_t r, std::size_t c) const { return node_->value(r, c); }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  /// Gradient of a leaf; empty Matrix when none has been accumulated.
  const Matrix& grad() const { return node_->grad; }
  Matrix& mutable_grad() { return node_->ensure_grad(); }
  void zero_grad() {
    if (!node_->grad.empty()) node_->grad.fill(0.0);
  }
  void clear_grad() { node_->grad = Matrix(); }

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  bool same_node(const Tensor& o) const { return node_ == o.node_; }

  /// Builds a result node. Records parents and the backward rule only when
  /// recording is enabled and some input requires a gradient.
  static Tensor make(Matrix value, std::initializer_list<Tensor> inputs, std::function<void(detail::Node&)> bw) {
    Tensor out;
    out.node_->value = std::move(value);
    if (!grad_enabled()) return out;
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (!any) return out;
    out.node_->requires_grad = true;
    out.node_->parents.reserve(inputs.size());
    for (const auto& in : inputs) out.node_->parents.push_back(in.node_);
    out.node_->backward = std::move(bw);
    return out;
  }

  static Tensor make(Matrix value, const std::vector<Tensor>& inputs, std::function<void(detail::Node&)> bw) {
    Tensor out;
    out.node_->value = std::move(value);
    if (!grad_enabled()) return out;
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (!any) return out;
    out.node_->requires_grad = true;
    out.node_->parents.reserve(inputs.size());
    for (const auto& in : inputs) out.node_->parents.push_back(in.node_);
    out.node_->backward = std::move(bw);
    return out;
  }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Topologically ordered record of every node that contributes a gradient to
/// `root`. Parents always precede children.
class GradTape {
 public:
  explicit GradTape(const Tensor& root) : root_(root) {
    if (!root.requires_grad()) return;
    // Iterative post-order DFS.
    std::unordered_set<const detail::Node*> seen;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    seen.insert(root.node().get());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->parents.size()) {
        detail::Node* p = node->parents[next++].get();
        if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
      } else {
        order_.push_back(node);
        stack.pop_back();
      }
    }
  }

  std::size_t size() const { return order_.size(); }
  const std::vector<detail::Node*>& nodes() const { return order_; }

  /// Seeds d(root)/d(root) = 1; root must be 1x1.
  void backward() {
    if (root_.rows() != 1 || root_.cols() != 1) {
      throw DimensionError("backward() without seed requires a 1x1 root, got " + shape_str(root_.value()));
    }
    backward(Matrix(1, 1, 1.0));
  }

  void backward(const Matrix& seed) {
    if (order_.empty()) return;
    if (!seed.same_shape(root_.value())) throw DimensionError("backward seed shape mismatch");
    // Leaves collect this pass into a fresh buffer that is added to their
    // running gradient once at the end, so k identical passes give exactly k
    // times the single-pass gradient.
    std::vector<std::pair<detail::Node*, Matrix>> stash;
    for (auto* n : order_) {
      if (n->is_leaf()) stash.emplace_back(n, std::move(n->grad));
      n->grad = Matrix();
    }
    detail::Node* root = order_.back();
    Matrix& rg = root->ensure_grad();
    for (std::size_t i = 0; i < rg.size(); ++i) rg.data[i] += seed.data[i];
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      detail::Node* n = *it;
      if (n->is_leaf() || !n->backward || n->grad.empty()) continue;
      n->backward(*n);
      n->grad = Matrix();  // intermediate grads are not kept
    }
    for (auto& [n, prev] : stash) {
      if (prev.empty()) continue;
      if (n->grad.empty()) {
        n->grad = std::move(prev);
      } else {
        for (std::size_t i = 0; i < prev.size(); ++i) n->grad.data[i] = prev.data[i] + n->grad.data[i];
      }
    }
  }

 private:
  Tensor root_;
  std::vector<detail::Node*> order_;
};

/// Convenience: record and run one backward pass from a scalar.
inline void backward(const Tensor& root) { GradTape(root).backward(); }

}  // namespace jnrf
