#include "mrccs/optim.hpp"

#include <cmath>

#include "mrccs/errors.hpp"

namespace mrccs {

void AdamState::step(ParamStore& store, double lr) {
  ++t_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (auto& e : store) {
    Moments& mo = moments_[e.name];
    if (mo.m.empty()) {
      mo.m.assign(e.value.size(), 0.0f);
      mo.v.assign(e.value.size(), 0.0f);
    } else if (mo.m.size() != e.value.size()) {
      throw ConfigError("adam state size mismatch for " + e.name);
    }
    for (size_t i = 0; i < e.value.size(); ++i) {
      const double g = e.grad[i];
      const double m = b1 * mo.m[i] + (1.0 - b1) * g;
      const double v = b2 * mo.v[i] + (1.0 - b2) * g * g;
      mo.m[i] = static_cast<float>(m);
      mo.v[i] = static_cast<float>(v);
      const double m_hat = m / corr1;
      const double v_hat = v / corr2;
      e.value[i] -= static_cast<float>(lr * m_hat / (std::sqrt(v_hat) + cfg_.eps));
    }
  }
}

double lr_at_epoch(int epoch) {
  if (epoch < 0 || epoch >= 200) {
    throw ConfigError("epoch " + std::to_string(epoch) + " outside schedule range [0, 200)");
  }
  static const int milestones[] = {60, 90, 120, 150, 180};
  int drops = 0;
  for (int m : milestones) {
    if (m <= epoch) ++drops;
  }
  return 1e-3 * std::pow(0.25, drops);
}

}  // namespace mrccs
