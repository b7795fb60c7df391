#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "explorium/error.hpp"
#include "explorium/tensor.hpp"

namespace explorium {

/// A trainable tensor with its accumulated gradient.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(T{0}); }
};

template <typename T>
using ParamGroup = std::vector<Parameter<T>*>;

namespace detail {

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  const Parameter<T>* source = nullptr;  // set for parameter leaves
  Parameter<T>* sink = nullptr;          // set for trainable parameter leaves
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  const Tensor<T>& val() const { return source ? source->value : value; }

  Tensor<T>& grad_buffer() {
    if (sink) return sink->grad;
    if (grad.empty()) grad = Tensor<T>(val().shape());
    return grad;
  }
};

}  // namespace detail

inline bool grad_enabled() { return detail::grad_mode(); }

/// Disables graph recording for the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode()) { detail::grad_mode() = false; }
  ~NoGradGuard() { detail::grad_mode() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Handle to a value in the recorded computation graph.
template <typename T>
class Var {
 public:
  using Node = detail::Node<T>;

  Var() = default;

  static Var constant(Tensor<T> t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    return Var(std::move(n));
  }

  /// Leaf bound to a trainable parameter; gradients accumulate into p.grad.
  static Var parameter(Parameter<T>& p) {
    auto n = std::make_shared<Node>();
    n->source = &p;
    n->sink = &p;
    n->requires_grad = grad_enabled();
    return Var(std::move(n));
  }

  /// Leaf reading a parameter without ever producing a gradient for it.
  static Var frozen(const Parameter<T>& p) {
    auto n = std::make_shared<Node>();
    n->source = &p;
    return Var(std::move(n));
  }

  /// Records an op output. `backward` receives the output node and must
  /// accumulate into the grad buffers of parents that require grad.
  static Var from_op(Tensor<T> value, std::vector<Var> inputs, std::function<void(Node&)> backward) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (grad_enabled() && any) {
      n->requires_grad = true;
      n->parents.reserve(inputs.size());
      for (auto& in : inputs) n->parents.push_back(in.node_);
      n->backward = std::move(backward);
    }
    return Var(std::move(n));
  }

  const Tensor<T>& value() const { return node_->val(); }
  const Shape& shape() const { return node_->val().shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}
  std::shared_ptr<Node> node_;
};

/// Reverse-mode sweep from a scalar loss. Populates Parameter::grad for every
/// trainable parameter reachable from `loss`.
template <typename T>
void backward(const Var<T>& loss) {
  if (loss.value().size() != 1) {
    throw ContractViolation("backward() requires a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  using Node = detail::Node<T>;
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer()[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

}  // namespace explorium
