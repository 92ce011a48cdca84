#include "mrccs/sensing.hpp"

#include <cstdio>
#include <numeric>

#include "mrccs/errors.hpp"
#include "mrccs/ops.hpp"

namespace mrccs {

std::string variant_name(SensingVariant v) {
  switch (v) {
    case SensingVariant::GSM: return "gsm";
    case SensingVariant::GSM_PLUS: return "gsm_plus";
    case SensingVariant::SINGLE_CONV: return "single_conv";
    case SensingVariant::SEQ_CONV: return "seq_conv";
  }
  throw ConfigError("unknown sensing variant");
}

SensingVariant variant_from_name(const std::string& name) {
  if (name == "gsm") return SensingVariant::GSM;
  if (name == "gsm_plus") return SensingVariant::GSM_PLUS;
  if (name == "single_conv") return SensingVariant::SINGLE_CONV;
  if (name == "seq_conv") return SensingVariant::SEQ_CONV;
  throw ConfigError("unknown sensing variant \"" + name +
                    "\" (expected gsm, gsm_plus, single_conv or seq_conv)");
}

std::string SensingPlan::ratio_string() const {
  long num = m;
  long den = pixels_per_block();
  const long g = std::gcd(num, den);
  return std::to_string(num / g) + "/" + std::to_string(den / g);
}

void SensingPlan::validate() const {
  if (k < 1) throw ConfigError("sensing plan needs k >= 1, got " + std::to_string(k));
  if (m < 1) throw ConfigError("sensing plan needs m >= 1, got " + std::to_string(m));
  if (feature_width < 1) {
    throw ConfigError("sensing plan needs feature_width >= 1, got " +
                      std::to_string(feature_width));
  }
}

namespace {

std::string percent_string(long num, long den) {
  const double pct = 100.0 * static_cast<double>(num) / static_cast<double>(den);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f%%", pct);
  return buf;
}

}  // namespace

SensingPlan plan_sensing(int ratio_num, int ratio_den, SensingVariant variant,
                         int feature_width) {
  if (ratio_num < 1 || ratio_den < 1) {
    throw ConfigError("sampling ratio must be a positive fraction, got " +
                      std::to_string(ratio_num) + "/" + std::to_string(ratio_den));
  }
  if (ratio_num > ratio_den) {
    throw ConfigError("sampling ratio " + std::to_string(ratio_num) + "/" +
                      std::to_string(ratio_den) + " exceeds 1");
  }
  // k=3 for ratios up to 25%, k=1 above; keeps m integral across the standard
  // ratio ladder {1,2,4,8,16}/64 and 2/4.
  const int k = 4 * ratio_num <= ratio_den ? 3 : 1;
  const long den = 1L << (2 * k);  // 4^k
  const long m_num = den * ratio_num;
  if (m_num % ratio_den != 0) {
    const long lo = m_num / ratio_den;  // floor(m)
    std::string err = "sampling ratio " + std::to_string(ratio_num) + "/" +
                      std::to_string(ratio_den) + " is not representable as m/" +
                      std::to_string(den) + " with integer m; nearest representable: ";
    if (lo >= 1) {
      err += std::to_string(lo) + "/" + std::to_string(den) + " (" +
             percent_string(lo, den) + ") and ";
    }
    err += std::to_string(lo + 1) + "/" + std::to_string(den) + " (" +
           percent_string(lo + 1, den) + ")";
    throw ConfigError(err);
  }
  SensingPlan plan;
  plan.variant = variant;
  plan.k = k;
  plan.m = static_cast<int>(m_num / ratio_den);
  plan.feature_width = feature_width;
  plan.validate();
  return plan;
}

Sensor::Sensor(SensingPlan plan) : plan_(plan) { plan_.validate(); }

namespace {

// Parameter names; every sensing conv is bias-free so each layer is one entry.
std::string stem_name() { return "sensing.stem"; }
std::string comp_name(int i) { return "sensing.comp" + std::to_string(i); }
std::string block_name(int i) { return "sensing.block" + std::to_string(i); }
std::string sampler_name() { return "sensing.sampler"; }
std::string single_name() { return "sensing.conv"; }

}  // namespace

void Sensor::register_params(ParamStore& store) const {
  const int F = plan_.feature_width;
  switch (plan_.variant) {
    case SensingVariant::GSM:
      store.add(stem_name(), ConvSpec::same(1, F, 3, 1, 1, false).weight_shape());
      for (int i = 1; i <= plan_.k; ++i) {
        store.add(comp_name(i), ConvSpec::same(F, F, 3, 2, 1, false).weight_shape());
      }
      store.add(sampler_name(),
                ConvSpec::same((plan_.k + 1) * F, plan_.m, 1, 1, 1, false).weight_shape());
      break;
    case SensingVariant::GSM_PLUS:
      store.add(stem_name(), ConvSpec::same(1, F, 3, 1, 1, false).weight_shape());
      for (int i = 1; i <= plan_.k; ++i) {
        store.add(block_name(i), ConvSpec::same(F, F, 3, 2, 1, false).weight_shape());
      }
      store.add(sampler_name(), ConvSpec::same(F, plan_.m, 1, 1, 1, false).weight_shape());
      break;
    case SensingVariant::SEQ_CONV:
      store.add(stem_name(), ConvSpec::same(1, F, 3, 1, 1, false).weight_shape());
      for (int i = 1; i <= plan_.k; ++i) {
        store.add(comp_name(i), ConvSpec::same(F, F, 3, 2, 1, false).weight_shape());
      }
      store.add(sampler_name(), ConvSpec::same(F, plan_.m, 1, 1, 1, false).weight_shape());
      break;
    case SensingVariant::SINGLE_CONV: {
      ConvSpec spec;
      spec.in_channels = 1;
      spec.out_channels = plan_.m;
      spec.kernel = plan_.block_size();
      spec.stride = plan_.block_size();
      spec.padding = 0;
      spec.has_bias = false;
      spec.validate();
      store.add(single_name(), spec.weight_shape());
      break;
    }
  }
}

void Sensor::init_params(ParamStore& store, Rng& rng) const {
  auto init = [&](const std::string& name) {
    auto& e = store.at(name);
    // weight shape is (out, in/groups, k, k); fan-in = in/groups * k * k
    const int fan_in = e.shape[1] * e.shape[2] * e.shape[3];
    kaiming_uniform_init(e, fan_in, rng);
  };
  switch (plan_.variant) {
    case SensingVariant::GSM:
    case SensingVariant::SEQ_CONV:
      init(stem_name());
      for (int i = 1; i <= plan_.k; ++i) init(comp_name(i));
      init(sampler_name());
      break;
    case SensingVariant::GSM_PLUS:
      init(stem_name());
      for (int i = 1; i <= plan_.k; ++i) init(block_name(i));
      init(sampler_name());
      break;
    case SensingVariant::SINGLE_CONV:
      init(single_name());
      break;
  }
}

void Sensor::check_input(const Tensor3& x) const {
  if (x.channels != 1) {
    throw ConfigError("sensing expects a single-channel image, got " + x.shape_string());
  }
  const int b = plan_.block_size();
  if (x.height % b != 0 || x.width % b != 0) {
    throw ConfigError("sensing input " + x.shape_string() + " not divisible by 2^k=" +
                      std::to_string(b) + "; pad first");
  }
}

Tape::NodeId Sensor::build(Tape& tape, Tape::NodeId x, ParamStore& store) const {
  check_input(tape.value(x));
  const int F = plan_.feature_width;
  switch (plan_.variant) {
    case SensingVariant::GSM: {
      // Collect the stem and every compaction depth, pool each down to the
      // deepest spatial size, concatenate, then sample once with a 1x1.
      std::vector<Tape::NodeId> levels;
      auto cur = tape.conv(x, ConvSpec::same(1, F, 3, 1, 1, false), store, stem_name());
      levels.push_back(cur);
      for (int i = 1; i <= plan_.k; ++i) {
        cur = tape.conv(cur, ConvSpec::same(F, F, 3, 2, 1, false), store, comp_name(i));
        levels.push_back(cur);
      }
      std::vector<Tape::NodeId> pooled;
      for (size_t level = 0; level < levels.size(); ++level) {
        auto n = levels[level];
        for (size_t hops = level; hops + 1 < levels.size(); ++hops) n = tape.mean_pool2(n);
        pooled.push_back(n);
      }
      auto fused = tape.concat(pooled);
      return tape.conv(fused, ConvSpec::same((plan_.k + 1) * F, plan_.m, 1, 1, 1, false),
                       store, sampler_name());
    }
    case SensingVariant::GSM_PLUS: {
      auto cur = tape.conv(x, ConvSpec::same(1, F, 3, 1, 1, false), store, stem_name());
      for (int i = 1; i <= plan_.k; ++i) {
        auto down = tape.conv(cur, ConvSpec::same(F, F, 3, 2, 1, false), store, block_name(i));
        cur = tape.add(down, tape.mean_pool2(cur));
      }
      return tape.conv(cur, ConvSpec::same(F, plan_.m, 1, 1, 1, false), store, sampler_name());
    }
    case SensingVariant::SEQ_CONV: {
      auto cur = tape.conv(x, ConvSpec::same(1, F, 3, 1, 1, false), store, stem_name());
      for (int i = 1; i <= plan_.k; ++i) {
        cur = tape.conv(cur, ConvSpec::same(F, F, 3, 2, 1, false), store, comp_name(i));
      }
      return tape.conv(cur, ConvSpec::same(F, plan_.m, 1, 1, 1, false), store, sampler_name());
    }
    case SensingVariant::SINGLE_CONV: {
      ConvSpec spec;
      spec.in_channels = 1;
      spec.out_channels = plan_.m;
      spec.kernel = plan_.block_size();
      spec.stride = plan_.block_size();
      spec.padding = 0;
      spec.has_bias = false;
      spec.validate();
      return tape.conv(x, spec, store, single_name());
    }
  }
  throw ConfigError("unknown sensing variant");
}

Measurements Sensor::sense(const Tensor3& x, ParamStore& store) const {
  Tape tape;
  auto y = build(tape, tape.constant(x), store);
  return Measurements{tape.value(y), plan_};
}

std::vector<LayerShape> Sensor::layer_shapes(int height, int width) const {
  const int b = plan_.block_size();
  if (height % b != 0 || width % b != 0) {
    throw ConfigError("layer_shapes needs dims divisible by 2^k");
  }
  std::vector<LayerShape> out;
  auto emit = [&](std::string kind, int h, int w) {
    out.push_back(LayerShape{std::move(kind), h, w});
  };
  const int hk = height / b;
  const int wk = width / b;
  switch (plan_.variant) {
    case SensingVariant::GSM: {
      emit("conv3x3/s1", height, width);
      int h = height, w = width;
      for (int i = 1; i <= plan_.k; ++i) {
        h /= 2;
        w /= 2;
        emit("conv3x3/s2", h, w);
      }
      for (int level = 0; level < plan_.k; ++level) {
        int ph = height >> level, pw = width >> level;
        for (int hops = level; hops < plan_.k; ++hops) {
          ph /= 2;
          pw /= 2;
          emit("pool2", ph, pw);
        }
      }
      emit("fuse", hk, wk);
      emit("conv1x1", hk, wk);
      break;
    }
    case SensingVariant::GSM_PLUS: {
      emit("conv3x3/s1", height, width);
      int h = height, w = width;
      for (int i = 1; i <= plan_.k; ++i) {
        h /= 2;
        w /= 2;
        emit("conv3x3/s2", h, w);
        emit("pool2", h, w);
        emit("fuse", h, w);
      }
      emit("conv1x1", hk, wk);
      break;
    }
    case SensingVariant::SEQ_CONV: {
      emit("conv3x3/s1", height, width);
      int h = height, w = width;
      for (int i = 1; i <= plan_.k; ++i) {
        h /= 2;
        w /= 2;
        emit("conv3x3/s2", h, w);
      }
      emit("conv1x1", hk, wk);
      break;
    }
    case SensingVariant::SINGLE_CONV:
      emit("conv" + std::to_string(b) + "x" + std::to_string(b) + "/s" + std::to_string(b),
           hk, wk);
      break;
  }
  return out;
}

SensingMatrix extract_matrix(const Sensor& sensor, ParamStore& store, int height, int width) {
  const long pixels = static_cast<long>(height) * width;
  if (pixels > 4096) {
    const SensingPlan& p = sensor.plan();
    const long rows = p.m * (height / p.block_size()) * (static_cast<long>(width) / p.block_size());
    const double mb = static_cast<double>(rows) * pixels * sizeof(float) / (1024.0 * 1024.0);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", mb);
    throw ConfigError("dense matrix extraction refused for " + std::to_string(height) + "x" +
                      std::to_string(width) + " (would need " + std::to_string(rows) + "x" +
                      std::to_string(pixels) + " floats, ~" + buf +
                      " MiB); intended for images up to 64x64");
  }
  Tensor3 probe(1, height, width);
  SensingMatrix mat;
  mat.cols = static_cast<int>(pixels);
  for (int i = 0; i < pixels; ++i) {
    probe.data[i] = 1.0f;
    Measurements y = sensor.sense(probe, store);
    probe.data[i] = 0.0f;
    if (i == 0) {
      mat.rows = y.tensor.size();
      mat.values.assign(static_cast<size_t>(mat.rows) * mat.cols, 0.0f);
    }
    for (int r = 0; r < mat.rows; ++r) {
      mat.values[static_cast<size_t>(r) * mat.cols + i] = y.tensor.data[r];
    }
  }
  return mat;
}

}  // namespace mrccs
