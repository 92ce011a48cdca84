#pragma once

#include <vector>

#include "mrccs/mrb.hpp"
#include "mrccs/params.hpp"
#include "mrccs/rng.hpp"
#include "mrccs/sensing.hpp"
#include "mrccs/tape.hpp"
#include "mrccs/tensor.hpp"

namespace mrccs {

struct ModelConfig {
  SensingPlan plan;
  int deep_channels = 32;  // C
  int mrb_count = 2;       // T
  bool measurements_reuse = true;

  void validate() const;
};

struct ReconstructionOutput {
  Measurements measurements;
  Tensor3 initial;   // I(y), 1xHxW
  Tensor3 residual;  // the deep network's correction, 1xHxW
  Tensor3 refined;   // initial + residual
};

// Node handles for one end-to-end forward pass on a tape.
struct ForwardNodes {
  Tape::NodeId x = -1;
  Tape::NodeId y = -1;
  Tape::NodeId initial = -1;
  Tape::NodeId residual = -1;
  Tape::NodeId refined = -1;
};

// The full compressed-sensing model: learned sensing y = S(x), linear
// initial reconstruction I(y) (grouped expansion + depth-to-space), and the
// deep refinement x_hat = D(I(y)) + I(y) built from repeated
// measurements-reuse blocks.
class Model {
 public:
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  const Sensor& sensor() const { return sensor_; }

  // Parameter creation order is sensing, initial, deep — fixed, so
  // checkpoints and optimizers see a stable enumeration.
  void register_params(ParamStore& store) const;
  void init_params(ParamStore& store, uint64_t seed) const;

  // Graph builders; x must be 1xHxW with H,W divisible by lcm(2^k, 4).
  Tape::NodeId build_sense(Tape& tape, Tape::NodeId x, ParamStore& store) const;
  Tape::NodeId build_initial(Tape& tape, Tape::NodeId y, ParamStore& store) const;
  Tape::NodeId build_deep(Tape& tape, Tape::NodeId initial, Tape::NodeId y,
                          ParamStore& store, Tape::NodeId* residual = nullptr) const;
  ForwardNodes build_forward(Tape& tape, Tape::NodeId x, ParamStore& store) const;

  // Eager wrappers over the same graphs.
  ReconstructionOutput forward(const Tensor3& x, ParamStore& store) const;
  Tensor3 initial_reconstruct(const Measurements& y, ParamStore& store) const;
  Tensor3 deep_reconstruct(const Tensor3& initial, const Measurements& y,
                           ParamStore& store) const;

  // Smallest H/W granularity a model input must tile by.
  int size_multiple() const;

 private:
  void check_image(const Tensor3& x) const;

  ModelConfig config_;
  Sensor sensor_;
  std::vector<MrbBlock> blocks_;
};

}  // namespace mrccs
