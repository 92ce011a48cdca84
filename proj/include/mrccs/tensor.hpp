#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mrccs/errors.hpp"

namespace mrccs {

// Rank-3 array, row-major by (channel, row, column). Images are 1xHxW with
// values in [0,1]; feature maps and measurements use the same layout.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Tensor3() = default;

  Tensor3(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w) {
    if (c < 1 || h < 1 || w < 1) {
      throw ConfigError("Tensor3 dims must be >= 1, got " + shape_string(c, h, w));
    }
    data.assign(static_cast<size_t>(c) * h * w, fill);
  }

  static Tensor3 from(int c, int h, int w, std::vector<float> values) {
    Tensor3 t(c, h, w);
    if (values.size() != t.data.size()) {
      throw ConfigError("Tensor3 value count " + std::to_string(values.size()) +
                        " does not match shape " + shape_string(c, h, w));
    }
    t.data = std::move(values);
    return t;
  }

  int size() const { return channels * height * width; }

  float& at(int c, int h, int w) {
    return data[(static_cast<size_t>(c) * height + h) * width + w];
  }
  float at(int c, int h, int w) const {
    return data[(static_cast<size_t>(c) * height + h) * width + w];
  }

  float* plane(int c) { return data.data() + static_cast<size_t>(c) * height * width; }
  const float* plane(int c) const {
    return data.data() + static_cast<size_t>(c) * height * width;
  }

  bool same_shape(const Tensor3& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  std::string shape_string() const { return shape_string(channels, height, width); }

  static std::string shape_string(int c, int h, int w) {
    return std::to_string(c) + "x" + std::to_string(h) + "x" + std::to_string(w);
  }
};

inline bool all_finite(const Tensor3& t) {
  for (float v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline float max_abs(const Tensor3& t) {
  float m = 0.0f;
  for (float v : t.data) m = std::max(m, std::fabs(v));
  return m;
}

inline float max_abs_diff(const Tensor3& a, const Tensor3& b) {
  if (!a.same_shape(b)) {
    throw ConfigError("shape mismatch: " + a.shape_string() + " vs " + b.shape_string());
  }
  float m = 0.0f;
  for (size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  }
  return m;
}

// max |a-b| / max(|b|_inf, floor); the relative deviation used by the
// linearity and equivalence checks.
inline float rel_inf_deviation(const Tensor3& a, const Tensor3& b, float floor = 1e-12f) {
  return max_abs_diff(a, b) / std::max(max_abs(b), floor);
}

}  // namespace mrccs
