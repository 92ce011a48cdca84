#pragma once

#include <string>
#include <vector>

#include "mrccs/params.hpp"
#include "mrccs/rng.hpp"
#include "mrccs/tape.hpp"
#include "mrccs/tensor.hpp"

namespace mrccs {

// The four learned sensing operators. GSM concatenates pooled features from
// every depth before one 1x1 sampler; GSM_PLUS collects them iteratively via
// conv+mean-pool residual blocks; SINGLE_CONV and SEQ_CONV are the ablation
// baselines (one big strided conv / plain conv chain without shortcuts).
enum class SensingVariant { GSM, GSM_PLUS, SINGLE_CONV, SEQ_CONV };

std::string variant_name(SensingVariant v);
SensingVariant variant_from_name(const std::string& name);

// Geometry of a sensing operator: k stride-2 stages (so measurements live at
// H/2^k x W/2^k), m measurement channels, F internal feature channels. The
// realized sampling ratio is exactly m/4^k.
struct SensingPlan {
  SensingVariant variant = SensingVariant::GSM_PLUS;
  int k = 3;
  int m = 4;
  int feature_width = 16;

  int block_size() const { return 1 << k; }          // 2^k
  long pixels_per_block() const { return 1L << (2 * k); }  // 4^k
  double realized_ratio() const {
    return static_cast<double>(m) / static_cast<double>(pixels_per_block());
  }
  std::string ratio_string() const;  // "m/4^k" in lowest terms
  void validate() const;
};

// Chooses the operator geometry for a requested sampling ratio num/den.
// Ratios <= 25% use k=3 (m = 64*ratio); larger ones use k=1 (m = 4*ratio).
// Ratios that don't land on an integer m for that k are refused, naming the
// nearest representable neighbours.
SensingPlan plan_sensing(int ratio_num, int ratio_den, SensingVariant variant,
                         int feature_width = 16);

struct Measurements {
  Tensor3 tensor;  // (m, H/2^k, W/2^k)
  SensingPlan plan;
};

// One structural step of a sensing operator: op kind plus output spatial
// size, with channel widths and fusion arity deliberately left out. Used to
// compare operator architectures (e.g. the k=1 collapse of GSM and GSM_PLUS
// onto the same graph).
struct LayerShape {
  std::string kind;  // "conv3x3/s1", "conv3x3/s2", "convKxK/sK", "pool2", "fuse", "conv1x1"
  int height = 0;
  int width = 0;
  bool operator==(const LayerShape&) const = default;
};

class Sensor {
 public:
  explicit Sensor(SensingPlan plan);

  const SensingPlan& plan() const { return plan_; }

  // Create this operator's parameter entries (all bias-free) under the
  // "sensing." prefix, then fill them with seeded Kaiming-uniform values.
  void register_params(ParamStore& store) const;
  void init_params(ParamStore& store, Rng& rng) const;

  // Record the sensing computation on a tape; x must be a 1xHxW node with
  // H, W divisible by 2^k.
  Tape::NodeId build(Tape& tape, Tape::NodeId x, ParamStore& store) const;

  // Eager evaluation of the same graph.
  Measurements sense(const Tensor3& x, ParamStore& store) const;

  // Architecture trace for an HxW input, independent of parameters.
  std::vector<LayerShape> layer_shapes(int height, int width) const;

 private:
  void check_input(const Tensor3& x) const;
  SensingPlan plan_;
};

// Dense sensing matrix, row-major: rows index vec(y), columns index vec(x)
// in Tensor3 data order.
struct SensingMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> values;

  float at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
};

// Materializes the operator by probing it with every standard-basis image.
// Dense probing is quadratic in the pixel count, so inputs larger than 64x64
// equivalents (H*W > 4096) are refused with a size estimate.
SensingMatrix extract_matrix(const Sensor& sensor, ParamStore& store, int height, int width);

}  // namespace mrccs
