#include "mrccs/reconstruction.hpp"

#include <numeric>

#include "mrccs/errors.hpp"
#include "mrccs/ops.hpp"

namespace mrccs {

void ModelConfig::validate() const {
  plan.validate();
  if (deep_channels < 4 || deep_channels % 4 != 0) {
    throw ConfigError("deep_channels must be a positive multiple of 4, got " +
                      std::to_string(deep_channels));
  }
  if (mrb_count < 1) {
    throw ConfigError("mrb_count must be >= 1, got " + std::to_string(mrb_count));
  }
}

Model::Model(ModelConfig config) : config_(config), sensor_(config.plan) {
  config_.validate();
  for (int t = 0; t < config_.mrb_count; ++t) {
    blocks_.emplace_back(t, config_.deep_channels, config_.plan, config_.measurements_reuse);
  }
}

int Model::size_multiple() const {
  return std::lcm(config_.plan.block_size(), 4);
}

void Model::check_image(const Tensor3& x) const {
  if (x.channels != 1) {
    throw ConfigError("model input must be a single-channel image, got " + x.shape_string());
  }
  const int f = size_multiple();
  if (x.height % f != 0 || x.width % f != 0) {
    throw ConfigError("model input " + x.shape_string() + " must tile by " +
                      std::to_string(f) + "; pad first");
  }
}

namespace {

// Channel multiplier of the grouped expansion. Integral for every standard
// plan; non-integral plans round up and trim back with a 1x1.
struct ExpandShape {
  int multiplier;
  bool needs_trim;
};

ExpandShape expand_shape(const SensingPlan& plan) {
  const int target = static_cast<int>(plan.pixels_per_block());  // 4^k
  if (target % plan.m == 0) return {target / plan.m, false};
  return {target / plan.m + 1, true};
}

}  // namespace

void Model::register_params(ParamStore& store) const {
  sensor_.register_params(store);

  const SensingPlan& plan = config_.plan;
  const auto ex = expand_shape(plan);
  store.add("init.expand",
            ConvSpec::same(plan.m, plan.m * ex.multiplier, 3, 1, plan.m, false).weight_shape());
  if (ex.needs_trim) {
    store.add("init.trim",
              ConvSpec::same(plan.m * ex.multiplier,
                             static_cast<int>(plan.pixels_per_block()), 1, 1, 1, false)
                  .weight_shape());
  }

  const int C = config_.deep_channels;
  store.add("deep.head.w", ConvSpec::same(1, C, 3).weight_shape());
  store.add("deep.head.b", {C});
  for (const auto& block : blocks_) block.register_params(store);
  store.add("deep.tail.w", ConvSpec::same(C, 1, 3).weight_shape());
  store.add("deep.tail.b", {1});
}

void Model::init_params(ParamStore& store, uint64_t seed) const {
  Rng rng(seed);
  sensor_.init_params(store, rng);
  auto kaiming = [&](const std::string& name) {
    auto& e = store.at(name);
    kaiming_uniform_init(e, e.shape[1] * e.shape[2] * e.shape[3], rng);
  };
  kaiming("init.expand");
  if (store.contains("init.trim")) kaiming("init.trim");
  kaiming("deep.head.w");
  for (const auto& block : blocks_) block.init_params(store, rng);
  kaiming("deep.tail.w");
}

Tape::NodeId Model::build_sense(Tape& tape, Tape::NodeId x, ParamStore& store) const {
  check_image(tape.value(x));
  return sensor_.build(tape, x, store);
}

Tape::NodeId Model::build_initial(Tape& tape, Tape::NodeId y, ParamStore& store) const {
  const SensingPlan& plan = config_.plan;
  const Tensor3& ym = tape.value(y);
  if (ym.channels != plan.m) {
    throw ConfigError("measurements have " + std::to_string(ym.channels) +
                      " channels, plan expects " + std::to_string(plan.m));
  }
  const auto ex = expand_shape(plan);
  auto expanded = tape.conv(
      y, ConvSpec::same(plan.m, plan.m * ex.multiplier, 3, 1, plan.m, false), store,
      "init.expand");
  if (ex.needs_trim) {
    expanded = tape.conv(expanded,
                         ConvSpec::same(plan.m * ex.multiplier,
                                        static_cast<int>(plan.pixels_per_block()), 1, 1, 1,
                                        false),
                         store, "init.trim");
  }
  return tape.depth_to_space(expanded, plan.block_size());
}

Tape::NodeId Model::build_deep(Tape& tape, Tape::NodeId initial, Tape::NodeId y,
                               ParamStore& store, Tape::NodeId* residual) const {
  const int C = config_.deep_channels;
  auto f = tape.relu(tape.conv(initial, ConvSpec::same(1, C, 3), store, "deep.head.w",
                               "deep.head.b"));
  for (const auto& block : blocks_) {
    f = block.build(tape, f, y, store);
  }
  auto res = tape.conv(f, ConvSpec::same(C, 1, 3), store, "deep.tail.w", "deep.tail.b");
  if (residual) *residual = res;
  return tape.add(res, initial);
}

ForwardNodes Model::build_forward(Tape& tape, Tape::NodeId x, ParamStore& store) const {
  ForwardNodes n;
  n.x = x;
  n.y = build_sense(tape, x, store);
  n.initial = build_initial(tape, n.y, store);
  n.refined = build_deep(tape, n.initial, n.y, store, &n.residual);
  return n;
}

ReconstructionOutput Model::forward(const Tensor3& x, ParamStore& store) const {
  Tape tape;
  auto nodes = build_forward(tape, tape.constant(x), store);
  ReconstructionOutput out;
  out.measurements = Measurements{tape.value(nodes.y), config_.plan};
  out.initial = tape.value(nodes.initial);
  out.residual = tape.value(nodes.residual);
  out.refined = tape.value(nodes.refined);
  return out;
}

Tensor3 Model::initial_reconstruct(const Measurements& y, ParamStore& store) const {
  Tape tape;
  auto node = build_initial(tape, tape.constant(y.tensor), store);
  return tape.value(node);
}

Tensor3 Model::deep_reconstruct(const Tensor3& initial, const Measurements& y,
                                ParamStore& store) const {
  Tape tape;
  auto node = build_deep(tape, tape.constant(initial), tape.constant(y.tensor), store);
  return tape.value(node);
}

}  // namespace mrccs
