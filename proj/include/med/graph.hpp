#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "med/tensor.hpp"

namespace med::ad {

template <class T>
class Graph;

/// Handle to a node of a Graph. A default-constructed Var is the empty tensor.
template <class T>
struct Var {
  Graph<T>* graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const BasicTensor<T>& value() const { return graph->value(*this); }
  const Shape& shape() const { return value().shape(); }
};

/// Tape of differentiable operations.
///
/// Nodes are appended in execution order and may only reference earlier
/// nodes, so the tape order is a topological order and reverse traversal
/// visits each node once. A graph is bound to one thread; Vars hold a raw
/// pointer, so graphs are neither copyable nor movable.
template <class T>
class Graph {
 public:
  using TensorT = BasicTensor<T>;

  struct BackwardArgs {
    const TensorT& output;
    const TensorT& grad_output;
    std::span<const TensorT* const> inputs;
    // Null where the input does not require a gradient; otherwise the rule
    // accumulates into the pointee.
    std::span<TensorT* const> grad_inputs;
  };
  using BackwardFn = std::function<void(const BackwardArgs&)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(TensorT value, std::string label = {});
  Var<T> leaf(TensorT value, bool requires_grad);
  /// Leaf whose gradient is added into `p.grad` by backward(). `p` must
  /// outlive the graph's next reset().
  Var<T> parameter(Parameter<T>& p);

  /// Appends an op node. Throws NumericalError if `value` is not finite.
  Var<T> record(std::string op, std::vector<Var<T>> inputs, TensorT value,
                BackwardFn backward, std::string label = {});

  /// Reverse-mode sweep from a scalar root. A second call without reset()
  /// is an error.
  void backward(Var<T> root);
  bool backward_done() const { return backward_done_; }

  /// Drops every node; parameters keep their accumulated gradients.
  void reset();

  const TensorT& value(Var<T> v) const;
  /// Gradient of the last backward root w.r.t. `v`; zeros if `v` was not on
  /// a path to the root.
  const TensorT& grad(Var<T> v) const;

  std::size_t size() const { return nodes_.size(); }
  const std::string& op(int id) const { return nodes_.at(id).op; }
  const std::string& label(int id) const { return nodes_.at(id).label; }
  const std::vector<int>& inputs(int id) const { return nodes_.at(id).inputs; }
  const TensorT& value(int id) const { return nodes_.at(id).value; }
  bool requires_grad(int id) const { return nodes_.at(id).requires_grad; }

  std::size_t count_op(std::string_view op) const;
  /// Number of nodes whose label starts with `prefix`.
  std::size_t count_label(std::string_view prefix) const;
  std::vector<int> find_label(std::string_view prefix) const;

 private:
  struct Node {
    std::string op;
    std::string label;
    std::vector<int> inputs;
    TensorT value;
    mutable TensorT grad;
    mutable bool has_grad = false;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  Var<T> push(Node node);
  const Node& node(Var<T> v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace med::ad
