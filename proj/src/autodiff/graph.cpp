#include "med/graph.hpp"

#include <algorithm>

#include "med/error.hpp"

namespace med::ad {

template <class T>
Var<T> Graph<T>::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var<T>{this, static_cast<int>(nodes_.size() - 1)};
}

template <class T>
const typename Graph<T>::Node& Graph<T>::node(Var<T> v) const {
  if (v.graph != this || v.id < 0 ||
      static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw GraphError("variable does not belong to this graph");
  }
  return nodes_[v.id];
}

template <class T>
Var<T> Graph<T>::constant(TensorT value, std::string label) {
  Node n;
  n.op = "constant";
  n.label = std::move(label);
  n.value = std::move(value);
  return push(std::move(n));
}

template <class T>
Var<T> Graph<T>::leaf(TensorT value, bool requires_grad) {
  Node n;
  n.op = "leaf";
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

template <class T>
Var<T> Graph<T>::parameter(Parameter<T>& p) {
  if (p.grad.shape() != p.value.shape()) p.grad = TensorT(p.value.shape());
  Node n;
  n.op = "parameter";
  n.label = p.name;
  n.value = p.value;
  n.requires_grad = p.requires_grad;
  n.param = &p;
  return push(std::move(n));
}

template <class T>
Var<T> Graph<T>::record(std::string op, std::vector<Var<T>> inputs,
                        TensorT value, BackwardFn backward, std::string label) {
  if (backward_done_) {
    throw GraphError("cannot extend a graph after backward(); call reset()");
  }
  Node n;
  const int self = static_cast<int>(nodes_.size());
  for (const auto& in : inputs) {
    (void)node(in);
    if (in.id >= self) {
      throw GraphError("cycle detected: op '" + op +
                       "' references a node that does not precede it");
    }
    n.inputs.push_back(in.id);
    n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
  }
  if (!value.all_finite()) {
    throw NumericalError(op, "non-finite value in output of op '" + op + "'");
  }
  n.op = std::move(op);
  n.label = std::move(label);
  n.value = std::move(value);
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

template <class T>
void Graph<T>::backward(Var<T> root) {
  const Node& r = node(root);
  if (r.value.numel() != 1) {
    throw GraphError("backward() requires a scalar root, got shape " +
                     r.value.shape().str());
  }
  if (backward_done_) {
    throw GraphError("backward() already ran on this graph; call reset()");
  }
  backward_done_ = true;
  for (auto& n : nodes_) {
    n.has_grad = false;
  }
  if (!r.requires_grad) return;

  r.grad = TensorT(r.value.shape(), T{1});
  r.has_grad = true;

  std::vector<const TensorT*> in_values;
  std::vector<TensorT*> in_grads;
  // Inputs always precede their consumers, so descending ids is a reverse
  // topological order.
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad) continue;
    if (n.param != nullptr) {
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      continue;
    }
    if (!n.backward) continue;
    in_values.clear();
    in_grads.clear();
    for (int pid : n.inputs) {
      Node& p = nodes_[pid];
      in_values.push_back(&p.value);
      if (p.requires_grad) {
        if (!p.has_grad) {
          p.grad = TensorT(p.value.shape());
          p.has_grad = true;
        }
        in_grads.push_back(&p.grad);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    n.backward(BackwardArgs{n.value, n.grad, in_values, in_grads});
    for (TensorT* g : in_grads) {
      if (g != nullptr && !g->all_finite()) {
        throw NumericalError(n.op, "non-finite gradient from backward of op '" +
                                       n.op + "'");
      }
    }
  }
}

template <class T>
void Graph<T>::reset() {
  nodes_.clear();
  backward_done_ = false;
}

template <class T>
const typename Graph<T>::TensorT& Graph<T>::value(Var<T> v) const {
  return node(v).value;
}

template <class T>
const typename Graph<T>::TensorT& Graph<T>::grad(Var<T> v) const {
  const Node& n = node(v);
  if (!backward_done_) {
    throw GraphError("grad() requested before backward()");
  }
  if (!n.has_grad) {
    n.grad = TensorT(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

template <class T>
std::size_t Graph<T>::count_op(std::string_view op) const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [&](const Node& n) { return n.op == op; }));
}

template <class T>
std::size_t Graph<T>::count_label(std::string_view prefix) const {
  return find_label(prefix).size();
}

template <class T>
std::vector<int> Graph<T>::find_label(std::string_view prefix) const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (std::string_view(nodes_[i].label).starts_with(prefix)) {
      ids.push_back(static_cast<int>(i));
    }
  }
  return ids;
}

template class Graph<float>;
template class Graph<double>;

}  // namespace med::ad
