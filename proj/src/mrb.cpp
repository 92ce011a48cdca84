#include "mrccs/mrb.hpp"

#include "mrccs/errors.hpp"
#include "mrccs/ops.hpp"

namespace mrccs {

MrbBlock::MrbBlock(int index, int channels, SensingPlan plan, bool measurements_reuse)
    : prefix_("deep.mrb" + std::to_string(index) + "."),
      channels_(channels),
      plan_(plan),
      reuse_(measurements_reuse) {
  if (channels_ < 4 || channels_ % 4 != 0) {
    throw ConfigError("reuse block needs channels divisible by 4, got " +
                      std::to_string(channels_));
  }
  plan_.validate();
}

namespace {

struct ReuseStep {
  ConvSpec spec;
  bool shuffle;  // depth_to_space(2) after the conv
};

// The adapter ladder from (m, H/2^k, W/2^k) measurements up to full-width
// features: bridge to H/4 first (one stride-2 conv for k=1, a plain conv for
// k=2, expand-and-shuffle rungs for k>=3), then two more rungs for H/2 and H.
std::vector<ReuseStep> reuse_steps(const SensingPlan& plan, int channels) {
  std::vector<ReuseStep> steps;
  const int C = channels;
  if (plan.k == 1) {
    steps.push_back({ConvSpec::same(plan.m, C, 3, 2, 1, false), false});
  } else if (plan.k == 2) {
    steps.push_back({ConvSpec::same(plan.m, C, 3, 1, 1, false), false});
  } else {
    steps.push_back({ConvSpec::same(plan.m, 4 * C, 3, 1, 1, false), true});
    for (int i = 0; i < plan.k - 3; ++i) {
      steps.push_back({ConvSpec::same(C, 4 * C, 3, 1, 1, false), true});
    }
  }
  steps.push_back({ConvSpec::same(C, 4 * C, 3, 1, 1, false), true});  // -> H/2
  steps.push_back({ConvSpec::same(C, 4 * C, 3, 1, 1, false), true});  // -> H
  return steps;
}

}  // namespace

void MrbBlock::register_params(ParamStore& store) const {
  const int C = channels_;
  auto add_conv = [&](const std::string& stem, const ConvSpec& spec) {
    store.add(prefix_ + stem + ".w", spec.weight_shape());
    if (spec.has_bias) store.add(prefix_ + stem + ".b", {spec.out_channels});
  };
  const int fuse_in = reuse_ ? 2 * C : C;
  add_conv("conv1", ConvSpec::same(C, C, 3, 2));
  add_conv("conv2", ConvSpec::same(C, C, 3, 2));
  add_conv("conv3", ConvSpec::same(fuse_in, C, 3));
  add_conv("conv4", ConvSpec::same(2 * C, 4 * C, 3));
  add_conv("conv5", ConvSpec::same(fuse_in, C, 3));
  add_conv("conv6", ConvSpec::same(2 * C, 4 * C, 3));
  add_conv("conv7", ConvSpec::same(fuse_in, C, 3));
  add_conv("conv8", ConvSpec::same(2 * C, C, 3));
  if (reuse_) {
    int i = 1;
    for (const auto& step : reuse_steps(plan_, C)) {
      store.add(prefix_ + "reuse" + std::to_string(i++) + ".w", step.spec.weight_shape());
    }
  }
}

void MrbBlock::init_params(ParamStore& store, Rng& rng) const {
  for (int i = 1; i <= 8; ++i) {
    auto& w = store.at(prefix_ + "conv" + std::to_string(i) + ".w");
    kaiming_uniform_init(w, w.shape[1] * w.shape[2] * w.shape[3], rng);
    // biases stay zero
  }
  if (reuse_) {
    const size_t rungs = reuse_steps(plan_, channels_).size();
    for (size_t i = 1; i <= rungs; ++i) {
      auto& w = store.at(prefix_ + "reuse" + std::to_string(i) + ".w");
      kaiming_uniform_init(w, w.shape[1] * w.shape[2] * w.shape[3], rng);
    }
  }
}

std::vector<Tape::NodeId> MrbBlock::build_reuse(Tape& tape, Tape::NodeId y,
                                                ParamStore& store) const {
  std::vector<Tape::NodeId> tops;
  auto cur = y;
  int i = 1;
  for (const auto& step : reuse_steps(plan_, channels_)) {
    cur = tape.conv(cur, step.spec, store, prefix_ + "reuse" + std::to_string(i++) + ".w");
    cur = tape.relu(cur);
    if (step.shuffle) cur = tape.depth_to_space(cur, 2);
    tops.push_back(cur);
  }
  // the last three rungs end at H/4, H/2, H — those are y1, y2, y3
  return {tops[tops.size() - 3], tops[tops.size() - 2], tops[tops.size() - 1]};
}

Tape::NodeId MrbBlock::build(Tape& tape, Tape::NodeId f_t, Tape::NodeId y, ParamStore& store,
                             MrbTrace* trace) const {
  const int C = channels_;
  const Tensor3& f = tape.value(f_t);
  if (f.channels != C) {
    throw ConfigError("reuse block input has " + std::to_string(f.channels) +
                      " channels, expected " + std::to_string(C));
  }
  if (f.height % 4 != 0 || f.width % 4 != 0) {
    throw ConfigError("reuse block input " + f.shape_string() +
                      " must tile by 4 (two halvings)");
  }
  if (reuse_) {
    const Tensor3& ym = tape.value(y);
    const int b = plan_.block_size();
    if (ym.channels != plan_.m || ym.height != f.height / b || ym.width != f.width / b) {
      throw ConfigError("measurements " + ym.shape_string() + " do not match plan (" +
                        std::to_string(plan_.m) + ", H/" + std::to_string(b) + ", W/" +
                        std::to_string(b) + ") for feature " + f.shape_string());
    }
  }

  MrbTrace local;
  MrbTrace& tr = trace ? *trace : local;

  auto conv = [&](Tape::NodeId in, const std::string& stem, const ConvSpec& spec, bool act) {
    auto out = tape.conv(in, spec, store, prefix_ + stem + ".w", prefix_ + stem + ".b");
    return act ? tape.relu(out) : out;
  };

  const int fuse_in = reuse_ ? 2 * C : C;

  // compress twice
  tr.f_down = conv(f_t, "conv1", ConvSpec::same(C, C, 3, 2), true);
  tr.f_down_down = conv(tr.f_down, "conv2", ConvSpec::same(C, C, 3, 2), true);

  if (reuse_) {
    auto ys = build_reuse(tape, y, store);
    tr.y1 = ys[0];
    tr.y2 = ys[1];
    tr.y3 = ys[2];
  }

  // scale /4: fuse with y1, expand with a preserved copy of the compressed feature
  Tape::NodeId fused1;
  if (reuse_) {
    tr.fuse1_parents = {tr.f_down_down, tr.y1};
    tr.fuse1 = tape.concat(tr.fuse1_parents);
    fused1 = tr.fuse1;
  } else {
    tr.fuse1_parents = {tr.f_down_down};
    fused1 = tr.f_down_down;
  }
  auto F1 = conv(fused1, "conv3", ConvSpec::same(fuse_in, C, 3), true);
  tr.expand1_parents = {F1, tr.f_down_down};
  auto pre_up1 = conv(tape.concat(tr.expand1_parents), "conv4",
                      ConvSpec::same(2 * C, 4 * C, 3), true);
  tr.up1 = tape.depth_to_space(pre_up1, 2);

  // scale /2
  Tape::NodeId fused2;
  if (reuse_) {
    tr.fuse2_parents = {tr.up1, tr.y2};
    tr.fuse2 = tape.concat(tr.fuse2_parents);
    fused2 = tr.fuse2;
  } else {
    tr.fuse2_parents = {tr.up1};
    fused2 = tr.up1;
  }
  auto F2 = conv(fused2, "conv5", ConvSpec::same(fuse_in, C, 3), true);
  tr.expand2_parents = {F2, tr.f_down};
  auto pre_up2 = conv(tape.concat(tr.expand2_parents), "conv6",
                      ConvSpec::same(2 * C, 4 * C, 3), true);
  tr.up2 = tape.depth_to_space(pre_up2, 2);

  // full scale; the closing fusion is linear
  Tape::NodeId fused3;
  if (reuse_) {
    tr.fuse3_parents = {tr.up2, tr.y3};
    tr.fuse3 = tape.concat(tr.fuse3_parents);
    fused3 = tr.fuse3;
  } else {
    tr.fuse3_parents = {tr.up2};
    fused3 = tr.up2;
  }
  auto F3 = conv(fused3, "conv7", ConvSpec::same(fuse_in, C, 3), true);
  tr.close_parents = {F3, f_t};
  tr.out = conv(tape.concat(tr.close_parents), "conv8", ConvSpec::same(2 * C, C, 3), false);
  return tr.out;
}

}  // namespace mrccs
