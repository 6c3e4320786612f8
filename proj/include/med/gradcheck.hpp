#pragma once

#include <functional>
#include <string>
#include <vector>

#include "med/graph.hpp"
#include "med/med_spec.hpp"

namespace med {

/// Which side of zero every leaky_relu input of a graph fell on.
using KinkPattern = std::vector<bool>;
KinkPattern kink_pattern(const ad::Graph<double>& graph);

/// A scalar function of some leaf tensors, evaluated in 64-bit. `evaluate`
/// returns the function value; when `grads` is non-null it also writes the
/// reverse-mode gradient of every leaf, and when `kinks` is non-null the
/// graph's kink pattern.
struct GradcheckCase {
  using Evaluate = std::function<double(const std::vector<ad::Tensor64>& leaves,
                                        std::vector<ad::Tensor64>* grads,
                                        KinkPattern* kinks)>;
  std::string name;
  std::vector<ad::Tensor64> leaves;
  Evaluate evaluate;
};

/// Wraps a graph builder: leaves become requires-grad leaf nodes.
GradcheckCase graph_case(
    std::string name, std::vector<ad::Tensor64> leaves,
    std::function<ad::Var<double>(ad::Graph<double>&, const std::vector<ad::Var<double>>&)>
        build);

struct GradcheckResult {
  std::string name;
  /// Largest per-leaf norm-wise relative error |ad - fd| / max(|ad|, |fd|, 1e-8).
  double max_rel_error = 0.0;
  std::size_t entries = 0;
  /// Entries whose +-step probe crossed a leaky_relu kink and were retried
  /// with a smaller step.
  std::size_t reduced = 0;
  /// Entries that crossed a kink at every step tried; excluded from the error.
  std::size_t skipped = 0;
  bool passed = false;
};

struct GradcheckOptions {
  double step = 1e-3;
  double tolerance = 1e-3;
  /// Step halvings tried when a probe crosses a kink.
  int max_halvings = 12;
};

/// Central differences for every entry of every leaf. A difference quotient
/// taken across a leaky_relu kink does not approximate the derivative, so such
/// entries are re-probed with successively halved steps.
GradcheckResult check_gradients(const GradcheckCase& c, const GradcheckOptions& options = {});

/// One case per differentiable op on small random tensors.
std::vector<GradcheckCase> op_cases(std::uint64_t seed);
/// A network built from `spec` on a `size` x `size` input, under each task
/// loss. Every parameter is a leaf.
std::vector<GradcheckCase> network_cases(const MedSpec& spec, int size);

/// Three-level intra-skip network used by the gradcheck command.
MedSpec default_gradcheck_spec();

}  // namespace med
