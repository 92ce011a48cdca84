#include "mrccs/ops.hpp"

#include <Eigen/Dense>

namespace mrccs {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatCM = Eigen::MatrixXf;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;
using MapCM = Eigen::Map<MatCM>;
using CMapCM = Eigen::Map<const MatCM>;

// Column j of the result holds the unrolled receptive field of output
// position j, so the conv becomes one GEMM per group.
void im2col(const Tensor3& in, const ConvSpec& s, int group, MatCM& col) {
  const int cg = s.in_channels / s.groups;
  const int oh = s.out_dim(in.height);
  const int ow = s.out_dim(in.width);
  const int k = s.kernel;
  col.resize(cg * k * k, oh * ow);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      float* dst = col.data() + static_cast<size_t>(oy * ow + ox) * col.rows();
      const int iy0 = oy * s.stride - s.padding;
      const int ix0 = ox * s.stride - s.padding;
      for (int c = 0; c < cg; ++c) {
        const float* plane = in.plane(group * cg + c);
        for (int ky = 0; ky < k; ++ky) {
          const int iy = iy0 + ky;
          if (iy < 0 || iy >= in.height) {
            for (int kx = 0; kx < k; ++kx) *dst++ = 0.0f;
            continue;
          }
          const float* row = plane + static_cast<size_t>(iy) * in.width;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ix0 + kx;
            *dst++ = (ix < 0 || ix >= in.width) ? 0.0f : row[ix];
          }
        }
      }
    }
  }
}

// Scatter-add of the column gradient back onto the input grid.
void col2im_add(const MatCM& col, const ConvSpec& s, int group, Tensor3& grad_in) {
  const int cg = s.in_channels / s.groups;
  const int oh = s.out_dim(grad_in.height);
  const int ow = s.out_dim(grad_in.width);
  const int k = s.kernel;
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const float* src = col.data() + static_cast<size_t>(oy * ow + ox) * col.rows();
      const int iy0 = oy * s.stride - s.padding;
      const int ix0 = ox * s.stride - s.padding;
      for (int c = 0; c < cg; ++c) {
        float* plane = grad_in.plane(group * cg + c);
        for (int ky = 0; ky < k; ++ky) {
          const int iy = iy0 + ky;
          if (iy < 0 || iy >= grad_in.height) {
            src += k;
            continue;
          }
          float* row = plane + static_cast<size_t>(iy) * grad_in.width;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ix0 + kx;
            if (ix >= 0 && ix < grad_in.width) row[ix] += *src;
            ++src;
          }
        }
      }
    }
  }
}

bool is_pointwise(const ConvSpec& s) {
  return s.kernel == 1 && s.stride == 1 && s.padding == 0;
}

}  // namespace

void ConvSpec::validate() const {
  if (in_channels < 1 || out_channels < 1 || kernel < 1 || stride < 1 || padding < 0 ||
      groups < 1) {
    throw ConfigError("conv spec fields must be positive (in=" +
                      std::to_string(in_channels) + " out=" + std::to_string(out_channels) +
                      " k=" + std::to_string(kernel) + " stride=" + std::to_string(stride) +
                      " pad=" + std::to_string(padding) + " groups=" + std::to_string(groups) +
                      ")");
  }
  if (in_channels % groups != 0 || out_channels % groups != 0) {
    throw ConfigError("conv groups=" + std::to_string(groups) +
                      " must divide in=" + std::to_string(in_channels) +
                      " and out=" + std::to_string(out_channels));
  }
}

Tensor3 conv_forward(const Tensor3& input, const ConvSpec& spec,
                     std::span<const float> weights, std::span<const float> bias) {
  spec.validate();
  if (input.channels != spec.in_channels) {
    throw ConfigError("conv input has " + std::to_string(input.channels) +
                      " channels, spec expects " + std::to_string(spec.in_channels));
  }
  if (static_cast<int>(weights.size()) != spec.weight_count()) {
    throw ConfigError("conv weights have " + std::to_string(weights.size()) +
                      " values, spec expects " + std::to_string(spec.weight_count()));
  }
  if (spec.has_bias && static_cast<int>(bias.size()) != spec.out_channels) {
    throw ConfigError("conv bias has " + std::to_string(bias.size()) +
                      " values, spec expects " + std::to_string(spec.out_channels));
  }
  const int oh = spec.out_dim(input.height);
  const int ow = spec.out_dim(input.width);
  if (oh < 1 || ow < 1) {
    throw ConfigError("conv output would be empty for input " + input.shape_string());
  }

  Tensor3 out(spec.out_channels, oh, ow);
  const int og = spec.out_channels / spec.groups;
  const int cg = spec.in_channels / spec.groups;
  const int kk = spec.kernel * spec.kernel;
  const int n = oh * ow;

  if (is_pointwise(spec)) {
    // 1x1 stride-1: the input is already the column matrix.
    for (int g = 0; g < spec.groups; ++g) {
      CMapRM w(weights.data() + static_cast<size_t>(g) * og * cg, og, cg);
      CMapRM x(input.plane(g * cg), cg, n);
      MapRM y(out.plane(g * og), og, n);
      y.noalias() = w * x;
    }
  } else {
    MatCM col;
    for (int g = 0; g < spec.groups; ++g) {
      im2col(input, spec, g, col);
      CMapRM w(weights.data() + static_cast<size_t>(g) * og * cg * kk, og, cg * kk);
      MapRM y(out.plane(g * og), og, n);
      y.noalias() = w * col;
    }
  }
  if (spec.has_bias) {
    for (int c = 0; c < spec.out_channels; ++c) {
      float* plane = out.plane(c);
      const float b = bias[c];
      for (int i = 0; i < n; ++i) plane[i] += b;
    }
  }
  return out;
}

void conv_backward(const Tensor3& input, const ConvSpec& spec,
                   std::span<const float> weights, const Tensor3& grad_out,
                   Tensor3* grad_input, std::span<float> grad_weights,
                   std::span<float> grad_bias) {
  const int oh = spec.out_dim(input.height);
  const int ow = spec.out_dim(input.width);
  if (grad_out.channels != spec.out_channels || grad_out.height != oh ||
      grad_out.width != ow) {
    throw ConfigError("conv grad_out shape " + grad_out.shape_string() +
                      " does not match output " +
                      Tensor3::shape_string(spec.out_channels, oh, ow));
  }
  const int og = spec.out_channels / spec.groups;
  const int cg = spec.in_channels / spec.groups;
  const int kk = spec.kernel * spec.kernel;
  const int n = oh * ow;

  if (grad_input) *grad_input = Tensor3(input.channels, input.height, input.width);

  if (is_pointwise(spec)) {
    for (int g = 0; g < spec.groups; ++g) {
      CMapRM go(grad_out.plane(g * og), og, n);
      CMapRM x(input.plane(g * cg), cg, n);
      MapRM gw(grad_weights.data() + static_cast<size_t>(g) * og * cg, og, cg);
      gw.noalias() += go * x.transpose();
      if (grad_input) {
        CMapRM w(weights.data() + static_cast<size_t>(g) * og * cg, og, cg);
        MapRM gx(grad_input->plane(g * cg), cg, n);
        gx.noalias() = w.transpose() * go;
      }
    }
  } else {
    MatCM col;
    for (int g = 0; g < spec.groups; ++g) {
      im2col(input, spec, g, col);
      CMapRM go(grad_out.plane(g * og), og, n);
      MapRM gw(grad_weights.data() + static_cast<size_t>(g) * og * cg * kk, og, cg * kk);
      gw.noalias() += go * col.transpose();
      if (grad_input) {
        CMapRM w(weights.data() + static_cast<size_t>(g) * og * cg * kk, og, cg * kk);
        MatCM gcol(cg * kk, n);
        gcol.noalias() = w.transpose() * go;
        col2im_add(gcol, spec, g, *grad_input);
      }
    }
  }
  if (spec.has_bias && !grad_bias.empty()) {
    for (int c = 0; c < spec.out_channels; ++c) {
      const float* plane = grad_out.plane(c);
      float acc = 0.0f;
      for (int i = 0; i < n; ++i) acc += plane[i];
      grad_bias[c] += acc;
    }
  }
}

Tensor3 mean_pool2(const Tensor3& input) {
  if (input.height % 2 != 0 || input.width % 2 != 0) {
    throw ConfigError("mean_pool2 requires even dims, got " + input.shape_string());
  }
  Tensor3 out(input.channels, input.height / 2, input.width / 2);
  for (int c = 0; c < input.channels; ++c) {
    const float* src = input.plane(c);
    float* dst = out.plane(c);
    for (int y = 0; y < out.height; ++y) {
      const float* r0 = src + static_cast<size_t>(2 * y) * input.width;
      const float* r1 = r0 + input.width;
      for (int x = 0; x < out.width; ++x) {
        dst[y * out.width + x] =
            (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]) * 0.25f;
      }
    }
  }
  return out;
}

Tensor3 mean_pool2_backward(const Tensor3& grad_out) {
  Tensor3 gin(grad_out.channels, grad_out.height * 2, grad_out.width * 2);
  for (int c = 0; c < grad_out.channels; ++c) {
    const float* src = grad_out.plane(c);
    float* dst = gin.plane(c);
    for (int y = 0; y < grad_out.height; ++y) {
      float* r0 = dst + static_cast<size_t>(2 * y) * gin.width;
      float* r1 = r0 + gin.width;
      for (int x = 0; x < grad_out.width; ++x) {
        const float g = src[y * grad_out.width + x] * 0.25f;
        r0[2 * x] = g;
        r0[2 * x + 1] = g;
        r1[2 * x] = g;
        r1[2 * x + 1] = g;
      }
    }
  }
  return gin;
}

Tensor3 depth_to_space(const Tensor3& input, int r) {
  if (r < 1) throw ConfigError("depth_to_space factor must be >= 1");
  if (input.channels % (r * r) != 0) {
    throw ConfigError("depth_to_space: " + std::to_string(input.channels) +
                      " channels not divisible by r^2=" + std::to_string(r * r));
  }
  if (r == 1) return input;
  Tensor3 out(input.channels / (r * r), input.height * r, input.width * r);
  for (int c = 0; c < out.channels; ++c) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        const float* src = input.plane(c * r * r + i * r + j);
        for (int h = 0; h < input.height; ++h) {
          for (int w = 0; w < input.width; ++w) {
            out.at(c, h * r + i, w * r + j) = src[h * input.width + w];
          }
        }
      }
    }
  }
  return out;
}

Tensor3 space_to_depth(const Tensor3& input, int r) {
  if (r < 1) throw ConfigError("space_to_depth factor must be >= 1");
  if (input.height % r != 0 || input.width % r != 0) {
    throw ConfigError("space_to_depth: dims of " + input.shape_string() +
                      " not divisible by r=" + std::to_string(r));
  }
  if (r == 1) return input;
  Tensor3 out(input.channels * r * r, input.height / r, input.width / r);
  for (int c = 0; c < input.channels; ++c) {
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        float* dst = out.plane(c * r * r + i * r + j);
        for (int h = 0; h < out.height; ++h) {
          for (int w = 0; w < out.width; ++w) {
            dst[h * out.width + w] = input.at(c, h * r + i, w * r + j);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace mrccs
