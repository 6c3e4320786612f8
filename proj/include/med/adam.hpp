#pragma once

#include <vector>

#include "med/tensor.hpp"

namespace med {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

/// Bias-corrected Adam over a fixed parameter list. Moments start at zero.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  /// Applies one update from each parameter's accumulated grad. Throws
  /// NumericalError naming the parameter if a gradient is not finite.
  void step(std::vector<ad::Parameter<float>>& params);

  int timestep() const { return t_; }
  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  int t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace med
