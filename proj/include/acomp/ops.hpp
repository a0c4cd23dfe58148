#pragma once

#include <cstddef>
#include <vector>

#include "acomp/tensor.hpp"

// Differentiable dense ops. Shapes must match exactly; the only implicit
// broadcast is the per-channel parameter of conv/batchnorm/linear.
namespace acomp {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float factor);
// a * s where s holds a single value; gradient flows into both.
Tensor mul_scalar(const Tensor& a, const Tensor& s);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Element `index` of the flattened tensor as a one-element tensor.
Tensor select(const Tensor& a, std::size_t index);

Tensor reshape(const Tensor& a, Shape shape);
// [n, ...] -> [n, rest]
Tensor flatten(const Tensor& a);

Tensor relu(const Tensor& a);
Tensor log(const Tensor& a);
// Both normalize over the last axis.
Tensor softmax(const Tensor& a);
Tensor log_softmax(const Tensor& a);

// Non-overlapping max pooling on NCHW, window = stride = `kernel`.
Tensor maxpool2d(const Tensor& x, std::size_t kernel);

// x [n, in], weight [out, in], bias [out] (may be empty) -> [n, out]
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// Cross-correlation. x [n, c, h, w], weight [o, c, kh, kw], bias [o] or empty.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias = Tensor(),
              Conv2dOptions options = {});

struct BatchNormStats {
  std::vector<float> running_mean;
  std::vector<float> running_var;
  float momentum = 0.1f;
  float eps = 1e-5f;

  explicit BatchNormStats(std::size_t channels = 0)
      : running_mean(channels, 0.0f), running_var(channels, 1.0f) {}
};

// Training mode normalizes with batch statistics and updates `stats`; eval
// mode uses the running statistics.
Tensor batchnorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   BatchNormStats& stats, bool training);

// Channels [begin, end) of an NCHW tensor.
Tensor channel_slice(const Tensor& x, std::size_t begin, std::size_t end);
Tensor channel_concat(const std::vector<Tensor>& parts);

// y[:, o] = sum_i matrix[o, i] * (x[:, i] - pre[i]) + post[o]. The matrix and
// shifts are constants; the gradient flows into x only. Empty pre/post mean 0.
Tensor channel_mix(const Tensor& x, const std::vector<float>& matrix, std::size_t out_channels,
                   const std::vector<float>& pre, const std::vector<float>& post);

}  // namespace acomp
