#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "mrccs/params.hpp"

namespace mrccs {

struct AdamConfig {
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

// Per-parameter first/second moments, lazily sized on the first step.
class AdamState {
 public:
  explicit AdamState(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return t_; }

  // Bias-corrected update: p -= lr * m_hat / (sqrt(v_hat) + eps).
  void step(ParamStore& store, double lr);

 private:
  struct Moments {
    std::vector<float> m;
    std::vector<float> v;
  };
  AdamConfig cfg_;
  long t_ = 0;
  std::unordered_map<std::string, Moments> moments_;
};

// Piecewise-constant schedule: starts at 1e-3 and quarters at epochs
// 60, 90, 120, 150, 180. Valid for 0 <= epoch < 200.
double lr_at_epoch(int epoch);

}  // namespace mrccs
