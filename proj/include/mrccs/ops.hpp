#pragma once

#include <span>
#include <vector>

#include "mrccs/tensor.hpp"

namespace mrccs {

// 2-D convolution geometry. same() gives the "same" zero-padded layout used
// throughout the model: odd kernel, padding (k-1)/2, so the output spatial
// size is ceil(in/stride).
struct ConvSpec {
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 3;
  int stride = 1;
  int padding = 0;
  int groups = 1;
  bool has_bias = true;

  static ConvSpec same(int in, int out, int k, int stride = 1, int groups = 1,
                       bool bias = true) {
    ConvSpec s;
    s.in_channels = in;
    s.out_channels = out;
    s.kernel = k;
    s.stride = stride;
    s.padding = (k - 1) / 2;
    s.groups = groups;
    s.has_bias = bias;
    s.validate();
    return s;
  }

  void validate() const;
  int out_dim(int in_dim) const {
    return (in_dim + 2 * padding - kernel) / stride + 1;
  }
  // weights are (out, in/groups, k, k)
  int weight_count() const {
    return out_channels * (in_channels / groups) * kernel * kernel;
  }
  std::vector<int> weight_shape() const {
    return {out_channels, in_channels / groups, kernel, kernel};
  }
};

// weights laid out (out, in/groups, k, k) row-major; bias is per out channel.
Tensor3 conv_forward(const Tensor3& input, const ConvSpec& spec,
                     std::span<const float> weights,
                     std::span<const float> bias = {});

// Accumulates into grad_weights/grad_bias; writes grad_input when non-null
// (grad_input is overwritten, not accumulated).
void conv_backward(const Tensor3& input, const ConvSpec& spec,
                   std::span<const float> weights, const Tensor3& grad_out,
                   Tensor3* grad_input, std::span<float> grad_weights,
                   std::span<float> grad_bias);

// 2x2 mean pooling with stride 2; dims must be even.
Tensor3 mean_pool2(const Tensor3& input);
Tensor3 mean_pool2_backward(const Tensor3& grad_out);

// out[c, h*r+i, w*r+j] = in[c*r*r + i*r + j, h, w]; channels must divide r^2.
Tensor3 depth_to_space(const Tensor3& input, int r);
// Exact inverse of depth_to_space.
Tensor3 space_to_depth(const Tensor3& input, int r);

}  // namespace mrccs
