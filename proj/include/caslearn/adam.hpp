// adam.hpp
//   Adam with bias-corrected moments over a ParamSet.

#pragma once

#include <vector>

#include "caslearn/params.hpp"

namespace caslearn {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig cfg) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return step_; }

  // grads parallel to params (same order and shapes). The step counter is
  // incremented before bias correction.
  void step(ParamSet& params, const std::vector<std::vector<double>>& grads);

  void reset() {
    m_.clear();
    v_.clear();
    step_ = 0;
  }

 private:
  AdamConfig cfg_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace caslearn
