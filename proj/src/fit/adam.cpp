#include "med/adam.hpp"

#include <cmath>

#include "med/error.hpp"

namespace med {

void Adam::step(std::vector<ad::Parameter<float>>& params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.numel(), 0.0);
      v_.emplace_back(p.value.numel(), 0.0);
    }
  }
  if (m_.size() != params.size()) {
    throw ShapeError("adam: parameter list changed between steps");
  }
  for (const auto& p : params) {
    if (p.requires_grad && !p.grad.all_finite()) {
      throw NumericalError("adam", "adam: non-finite gradient in parameter '" + p.name + "'");
    }
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, t_);
  const double c2 = 1.0 - std::pow(b2, t_);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    if (!p.requires_grad) continue;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double g = p.grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double update = config_.learning_rate * (m[i] / c1) /
                            (std::sqrt(v[i] / c2) + config_.eps);
      p.value[i] = static_cast<float>(p.value[i] - update);
    }
  }
}

}  // namespace med
