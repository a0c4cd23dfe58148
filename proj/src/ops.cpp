#include "acomp/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "acomp/kernels.hpp"

namespace acomp {

namespace {

using ImplPtr = std::shared_ptr<TensorImpl>;

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) +
                                ", got shape " + shape_str(a.shape()));
  }
}

// Gradient buffer of an input, or an empty span when it does not take part.
std::span<float> grad_of(const ImplPtr& t) {
  if (!t->requires_grad) return {};
  return t->ensure_grad();
}

std::vector<float> transpose(const std::vector<float>& m, std::size_t rows, std::size_t cols) {
  std::vector<float> t(m.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) t[c * rows + r] = m[r * cols + c];
  return t;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<float> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  ImplPtr ai = a.impl(), bi = b.impl();
  return make_result(a.shape(), std::move(out), {a, b}, [ai, bi](std::span<const float> g) {
    auto ga = grad_of(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
    auto gb = grad_of(bi);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<float> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  ImplPtr ai = a.impl(), bi = b.impl();
  return make_result(a.shape(), std::move(out), {a, b}, [ai, bi](std::span<const float> g) {
    auto ga = grad_of(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
    auto gb = grad_of(bi);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<float> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  ImplPtr ai = a.impl(), bi = b.impl();
  return make_result(a.shape(), std::move(out), {a, b}, [ai, bi](std::span<const float> g) {
    auto ga = grad_of(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bi->data[i];
    auto gb = grad_of(bi);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * ai->data[i];
  });
}

Tensor scale(const Tensor& a, float factor) {
  std::vector<float> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  ImplPtr ai = a.impl();
  return make_result(a.shape(), std::move(out), {a}, [ai, factor](std::span<const float> g) {
    auto ga = grad_of(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * factor;
  });
}

Tensor mul_scalar(const Tensor& a, const Tensor& s) {
  const float sv = s.item();
  std::vector<float> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * sv;
  ImplPtr ai = a.impl(), si = s.impl();
  return make_result(a.shape(), std::move(out), {a, s}, [ai, si](std::span<const float> g) {
    const float sv = si->data[0];
    auto ga = grad_of(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * sv;
    auto gs = grad_of(si);
    if (!gs.empty()) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += static_cast<double>(g[i]) * ai->data[i];
      gs[0] += static_cast<float>(acc);
    }
  });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (float v : a.data()) acc += v;
  ImplPtr ai = a.impl();
  return make_result(Shape{1}, {static_cast<float>(acc)}, {a}, [ai](std::span<const float> g) {
    auto ga = grad_of(ai);
    for (auto& v : ga) v += g[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw std::invalid_argument("mean: empty tensor");
  return scale(sum(a), 1.0f / static_cast<float>(a.numel()));
}

Tensor select(const Tensor& a, std::size_t index) {
  if (index >= a.numel()) {
    throw std::out_of_range("select: index " + std::to_string(index) + " outside " +
                            shape_str(a.shape()));
  }
  ImplPtr ai = a.impl();
  return make_result(Shape{1}, {a[index]}, {a}, [ai, index](std::span<const float> g) {
    auto ga = grad_of(ai);
    if (!ga.empty()) ga[index] += g[0];
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw std::invalid_argument("reshape: cannot view " + shape_str(a.shape()) + " as " +
                                shape_str(shape));
  }
  ImplPtr ai = a.impl();
  return make_result(std::move(shape), a.values(), {a}, [ai](std::span<const float> g) {
    auto ga = grad_of(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
  });
}

Tensor flatten(const Tensor& a) {
  if (a.rank() < 2) throw std::invalid_argument("flatten: need rank >= 2, got " + shape_str(a.shape()));
  return reshape(a, Shape{a.dim(0), a.numel() / a.dim(0)});
}

Tensor relu(const Tensor& a) {
  std::vector<float> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0f ? a[i] : 0.0f;
  ImplPtr ai = a.impl();
  return make_result(a.shape(), std::move(out), {a}, [ai](std::span<const float> g) {
    auto ga = grad_of(ai);
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (ai->data[i] > 0.0f) ga[i] += g[i];
  });
}

Tensor log(const Tensor& a) {
  std::vector<float> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(a[i]);
  ImplPtr ai = a.impl();
  return make_result(a.shape(), std::move(out), {a}, [ai](std::span<const float> g) {
    auto ga = grad_of(ai);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] / ai->data[i];
  });
}

namespace {

std::size_t last_axis(const char* op, const Tensor& a) {
  if (a.rank() == 0 || a.shape().back() == 0) {
    throw std::invalid_argument(std::string(op) + ": empty normalization axis in " +
                                shape_str(a.shape()));
  }
  return a.shape().back();
}

}  // namespace

Tensor softmax(const Tensor& a) {
  const std::size_t k = last_axis("softmax", a);
  const std::size_t rows = a.numel() / k;
  std::vector<float> out(a.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const float* x = a.data().data() + r * k;
    float* y = out.data() + r * k;
    const float mx = *std::max_element(x, x + k);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = std::exp(x[i] - mx);
      z += y[i];
    }
    for (std::size_t i = 0; i < k; ++i) y[i] = static_cast<float>(y[i] / z);
  }
  ImplPtr ai = a.impl();
  std::vector<float> saved = out;
  return make_result(a.shape(), std::move(out), {a},
                     [ai, saved = std::move(saved), k, rows](std::span<const float> g) {
                       auto ga = grad_of(ai);
                       if (ga.empty()) return;
                       for (std::size_t r = 0; r < rows; ++r) {
                         const float* y = saved.data() + r * k;
                         const float* gy = g.data() + r * k;
                         double dot = 0.0;
                         for (std::size_t i = 0; i < k; ++i) dot += static_cast<double>(gy[i]) * y[i];
                         for (std::size_t i = 0; i < k; ++i)
                           ga[r * k + i] += y[i] * (gy[i] - static_cast<float>(dot));
                       }
                     });
}

Tensor log_softmax(const Tensor& a) {
  const std::size_t k = last_axis("log_softmax", a);
  const std::size_t rows = a.numel() / k;
  std::vector<float> out(a.numel());
  for (std::size_t r = 0; r < rows; ++r) {
    const float* x = a.data().data() + r * k;
    float* y = out.data() + r * k;
    const float mx = *std::max_element(x, x + k);
    double z = 0.0;
    for (std::size_t i = 0; i < k; ++i) z += std::exp(static_cast<double>(x[i] - mx));
    const float lse = mx + static_cast<float>(std::log(z));
    for (std::size_t i = 0; i < k; ++i) y[i] = x[i] - lse;
  }
  ImplPtr ai = a.impl();
  std::vector<float> saved = out;
  return make_result(a.shape(), std::move(out), {a},
                     [ai, saved = std::move(saved), k, rows](std::span<const float> g) {
                       auto ga = grad_of(ai);
                       if (ga.empty()) return;
                       for (std::size_t r = 0; r < rows; ++r) {
                         const float* y = saved.data() + r * k;
                         const float* gy = g.data() + r * k;
                         double gsum = 0.0;
                         for (std::size_t i = 0; i < k; ++i) gsum += gy[i];
                         for (std::size_t i = 0; i < k; ++i)
                           ga[r * k + i] += gy[i] - std::exp(y[i]) * static_cast<float>(gsum);
                       }
                     });
}

Tensor maxpool2d(const Tensor& x, std::size_t kernel) {
  require_rank("maxpool2d", x, 4);
  if (kernel == 0 || x.dim(2) < kernel || x.dim(3) < kernel) {
    throw std::invalid_argument("maxpool2d: window " + std::to_string(kernel) +
                                " does not fit input " + shape_str(x.shape()));
  }
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = h / kernel, ow = w / kernel;
  std::vector<float> out(n * c * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t plane = 0; plane < n * c; ++plane) {
    const float* src = x.data().data() + plane * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (oy * kernel) * w + ox * kernel;
        for (std::size_t ky = 0; ky < kernel; ++ky)
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::size_t idx = (oy * kernel + ky) * w + ox * kernel + kx;
            if (src[idx] > src[best]) best = idx;
          }
        const std::size_t o = (plane * oh + oy) * ow + ox;
        out[o] = src[best];
        argmax[o] = plane * h * w + best;
      }
    }
  }
  ImplPtr xi = x.impl();
  return make_result(Shape{n, c, oh, ow}, std::move(out), {x},
                     [xi, argmax = std::move(argmax)](std::span<const float> g) {
                       auto gx = grad_of(xi);
                       if (gx.empty()) return;
                       for (std::size_t o = 0; o < argmax.size(); ++o) gx[argmax[o]] += g[o];
                     });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank("linear", x, 2);
  require_rank("linear", weight, 2);
  const std::size_t n = x.dim(0), in = x.dim(1), out_f = weight.dim(0);
  if (weight.dim(1) != in) {
    throw std::invalid_argument("linear: input " + shape_str(x.shape()) +
                                " incompatible with weight " + shape_str(weight.shape()));
  }
  const bool has_bias = bias.numel() > 0;
  if (has_bias && bias.numel() != out_f) {
    throw std::invalid_argument("linear: bias " + shape_str(bias.shape()) + " for weight " +
                                shape_str(weight.shape()));
  }
  std::vector<float> out(n * out_f);
  kernels::gemm_nt(n, out_f, in, x.data().data(), weight.data().data(), out.data(), false);
  if (has_bias)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t o = 0; o < out_f; ++o) out[r * out_f + o] += bias[o];

  ImplPtr xi = x.impl(), wi = weight.impl(), bi = bias.impl();
  std::vector<Tensor> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return make_result(Shape{n, out_f}, std::move(out), inputs,
                     [xi, wi, bi, n, in, out_f, has_bias](std::span<const float> g) {
                       if (auto gx = grad_of(xi); !gx.empty())
                         kernels::gemm_nn(n, in, out_f, g.data(), wi->data.data(), gx.data(), true);
                       if (auto gw = grad_of(wi); !gw.empty())
                         kernels::gemm_tn(out_f, in, n, g.data(), xi->data.data(), gw.data(), true);
                       if (has_bias)
                         if (auto gb = grad_of(bi); !gb.empty())
                           for (std::size_t r = 0; r < n; ++r)
                             for (std::size_t o = 0; o < out_f; ++o) gb[o] += g[r * out_f + o];
                     });
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Conv2dOptions options) {
  require_rank("conv2d", x, 4);
  require_rank("conv2d", weight, 4);
  if (weight.dim(1) != x.dim(1)) {
    throw std::invalid_argument("conv2d: input " + shape_str(x.shape()) +
                                " has a channel count incompatible with weight " +
                                shape_str(weight.shape()));
  }
  if (options.stride == 0 || x.dim(2) + 2 * options.padding < weight.dim(2) ||
      x.dim(3) + 2 * options.padding < weight.dim(3)) {
    throw std::invalid_argument("conv2d: kernel " + shape_str(weight.shape()) +
                                " does not fit input " + shape_str(x.shape()));
  }
  const bool has_bias = bias.numel() > 0;
  const std::size_t oc = weight.dim(0);
  if (has_bias && bias.numel() != oc) {
    throw std::invalid_argument("conv2d: bias " + shape_str(bias.shape()) + " for weight " +
                                shape_str(weight.shape()));
  }
  kernels::ConvGeometry geo{x.dim(0), x.dim(1), x.dim(2), x.dim(3),
                            weight.dim(2), weight.dim(3), options.stride, options.padding};
  const std::size_t oh = geo.out_h(), ow = geo.out_w(), plane = oh * ow;
  const std::size_t ncols = geo.columns(), patch = geo.patch(), n = geo.batch;

  std::vector<float> cols(patch * ncols);
  kernels::im2col(geo, x.data().data(), cols.data());
  std::vector<float> prod(oc * ncols);
  kernels::gemm_nn(oc, ncols, patch, weight.data().data(), cols.data(), prod.data(), false);

  // [oc, n, plane] -> [n, oc, plane]
  std::vector<float> out(n * oc * plane);
  for (std::size_t o = 0; o < oc; ++o) {
    const float b = has_bias ? bias[o] : 0.0f;
    for (std::size_t s = 0; s < n; ++s) {
      const float* src = prod.data() + (o * n + s) * plane;
      float* dst = out.data() + (s * oc + o) * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p] + b;
    }
  }

  ImplPtr xi = x.impl(), wi = weight.impl(), bi = bias.impl();
  std::vector<Tensor> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  const bool keep_cols = weight.requires_grad();
  return make_result(
      Shape{n, oc, oh, ow}, std::move(out), inputs,
      [xi, wi, bi, geo, has_bias, cols = keep_cols ? std::move(cols) : std::vector<float>{}](
          std::span<const float> g) {
        const std::size_t oc = wi->shape[0];
        const std::size_t plane = geo.out_h() * geo.out_w();
        const std::size_t n = geo.batch, ncols = geo.columns(), patch = geo.patch();
        std::vector<float> gmat(oc * ncols);
        for (std::size_t o = 0; o < oc; ++o)
          for (std::size_t s = 0; s < n; ++s)
            std::copy_n(g.data() + (s * oc + o) * plane, plane, gmat.data() + (o * n + s) * plane);
        if (has_bias)
          if (auto gb = grad_of(bi); !gb.empty())
            for (std::size_t o = 0; o < oc; ++o) {
              double acc = 0.0;
              for (std::size_t c = 0; c < ncols; ++c) acc += gmat[o * ncols + c];
              gb[o] += static_cast<float>(acc);
            }
        if (auto gw = grad_of(wi); !gw.empty())
          kernels::gemm_nt(oc, patch, ncols, gmat.data(), cols.data(), gw.data(), true);
        if (auto gx = grad_of(xi); !gx.empty()) {
          std::vector<float> gcols(patch * ncols);
          kernels::gemm_tn(patch, ncols, oc, wi->data.data(), gmat.data(), gcols.data(), false);
          kernels::col2im(geo, gcols.data(), gx.data());
        }
      });
}

Tensor batchnorm2d(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                   BatchNormStats& stats, bool training) {
  require_rank("batchnorm2d", x, 4);
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (gamma.numel() != c || beta.numel() != c || stats.running_mean.size() != c ||
      stats.running_var.size() != c) {
    throw std::invalid_argument("batchnorm2d: per-channel parameters do not match " +
                                std::to_string(c) + " channels of " + shape_str(x.shape()));
  }
  const std::size_t count = n * plane;
  std::vector<float> mu(c), inv_std(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    if (training) {
      double s = 0.0, s2 = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        const float* p = x.data().data() + (b * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) s += p[i];
      }
      const double m = s / static_cast<double>(count);
      for (std::size_t b = 0; b < n; ++b) {
        const float* p = x.data().data() + (b * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) s2 += (p[i] - m) * (p[i] - m);
      }
      const double var = s2 / static_cast<double>(count);
      mu[ch] = static_cast<float>(m);
      inv_std[ch] = static_cast<float>(1.0 / std::sqrt(var + stats.eps));
      const double unbiased = count > 1 ? s2 / static_cast<double>(count - 1) : var;
      stats.running_mean[ch] =
          (1.0f - stats.momentum) * stats.running_mean[ch] + stats.momentum * mu[ch];
      stats.running_var[ch] = (1.0f - stats.momentum) * stats.running_var[ch] +
                              stats.momentum * static_cast<float>(unbiased);
    } else {
      mu[ch] = stats.running_mean[ch];
      inv_std[ch] = 1.0f / std::sqrt(stats.running_var[ch] + stats.eps);
    }
  }
  std::vector<float> xhat(x.numel()), out(x.numel());
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t off = (b * c + ch) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        xhat[off + i] = (x[off + i] - mu[ch]) * inv_std[ch];
        out[off + i] = xhat[off + i] * gamma[ch] + beta[ch];
      }
    }

  ImplPtr xi = x.impl(), gi = gamma.impl(), bi = beta.impl();
  return make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [xi, gi, bi, xhat = std::move(xhat), inv_std, n, c, plane, training](std::span<const float> g) {
        const double count = static_cast<double>(n * plane);
        std::vector<double> sum_g(c, 0.0), sum_gx(c, 0.0);
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t off = (b * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              sum_g[ch] += g[off + i];
              sum_gx[ch] += static_cast<double>(g[off + i]) * xhat[off + i];
            }
          }
        if (auto gg = grad_of(gi); !gg.empty())
          for (std::size_t ch = 0; ch < c; ++ch) gg[ch] += static_cast<float>(sum_gx[ch]);
        if (auto gb = grad_of(bi); !gb.empty())
          for (std::size_t ch = 0; ch < c; ++ch) gb[ch] += static_cast<float>(sum_g[ch]);
        auto gx = grad_of(xi);
        if (gx.empty()) return;
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t off = (b * c + ch) * plane;
            const float k = gi->data[ch] * inv_std[ch];
            if (training) {
              const float mg = static_cast<float>(sum_g[ch] / count);
              const float mgx = static_cast<float>(sum_gx[ch] / count);
              for (std::size_t i = 0; i < plane; ++i)
                gx[off + i] += k * (g[off + i] - mg - xhat[off + i] * mgx);
            } else {
              for (std::size_t i = 0; i < plane; ++i) gx[off + i] += k * g[off + i];
            }
          }
      });
}

Tensor channel_slice(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank("channel_slice", x, 4);
  if (begin >= end || end > x.dim(1)) {
    throw std::invalid_argument("channel_slice: empty or out-of-range slice [" +
                                std::to_string(begin) + ", " + std::to_string(end) + ") of " +
                                shape_str(x.shape()));
  }
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3), width = end - begin;
  std::vector<float> out(n * width * plane);
  for (std::size_t b = 0; b < n; ++b)
    std::copy_n(x.data().data() + (b * c + begin) * plane, width * plane,
                out.data() + b * width * plane);
  ImplPtr xi = x.impl();
  return make_result(Shape{n, width, x.dim(2), x.dim(3)}, std::move(out), {x},
                     [xi, n, c, plane, begin, width](std::span<const float> g) {
                       auto gx = grad_of(xi);
                       if (gx.empty()) return;
                       for (std::size_t b = 0; b < n; ++b) {
                         const float* src = g.data() + b * width * plane;
                         float* dst = gx.data() + (b * c + begin) * plane;
                         for (std::size_t i = 0; i < width * plane; ++i) dst[i] += src[i];
                       }
                     });
}

Tensor channel_concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("channel_concat: no inputs");
  const Tensor& first = parts.front();
  require_rank("channel_concat", first, 4);
  const std::size_t n = first.dim(0), h = first.dim(2), w = first.dim(3), plane = h * w;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank("channel_concat", p, 4);
    if (p.dim(0) != n || p.dim(2) != h || p.dim(3) != w) {
      throw std::invalid_argument("channel_concat: part " + shape_str(p.shape()) +
                                  " incompatible with " + shape_str(first.shape()));
    }
    total += p.dim(1);
  }
  std::vector<float> out(n * total * plane);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t width = p.dim(1);
    for (std::size_t b = 0; b < n; ++b)
      std::copy_n(p.data().data() + b * width * plane, width * plane,
                  out.data() + (b * total + off) * plane);
    off += width;
  }
  std::vector<ImplPtr> impls;
  for (const auto& p : parts) impls.push_back(p.impl());
  return make_result(Shape{n, total, h, w}, std::move(out), parts,
                     [impls, offsets, n, total, plane](std::span<const float> g) {
                       for (std::size_t k = 0; k < impls.size(); ++k) {
                         auto gp = grad_of(impls[k]);
                         if (gp.empty()) continue;
                         const std::size_t width = impls[k]->shape[1];
                         for (std::size_t b = 0; b < n; ++b) {
                           const float* src = g.data() + (b * total + offsets[k]) * plane;
                           float* dst = gp.data() + b * width * plane;
                           for (std::size_t i = 0; i < width * plane; ++i) dst[i] += src[i];
                         }
                       }
                     });
}

Tensor channel_mix(const Tensor& x, const std::vector<float>& matrix, std::size_t out_channels,
                   const std::vector<float>& pre, const std::vector<float>& post) {
  require_rank("channel_mix", x, 4);
  const std::size_t n = x.dim(0), in = x.dim(1), plane = x.dim(2) * x.dim(3);
  if (matrix.size() != out_channels * in || (!pre.empty() && pre.size() != in) ||
      (!post.empty() && post.size() != out_channels)) {
    throw std::invalid_argument("channel_mix: " + std::to_string(out_channels) + "x" +
                                std::to_string(in) + " map does not fit input " +
                                shape_str(x.shape()));
  }
  std::vector<float> out(n * out_channels * plane);
  kernels::channel_mix(n, in, out_channels, plane, matrix.data(), pre.empty() ? nullptr : pre.data(),
                       post.empty() ? nullptr : post.data(), x.data().data(), out.data());
  ImplPtr xi = x.impl();
  return make_result(Shape{n, out_channels, x.dim(2), x.dim(3)}, std::move(out), {x},
                     [xi, mt = transpose(matrix, out_channels, in), n, in, out_channels,
                      plane](std::span<const float> g) {
                       auto gx = grad_of(xi);
                       if (gx.empty()) return;
                       std::vector<float> tmp(n * in * plane);
                       kernels::channel_mix(n, out_channels, in, plane, mt.data(), nullptr,
                                            nullptr, g.data(), tmp.data());
                       for (std::size_t i = 0; i < tmp.size(); ++i) gx[i] += tmp[i];
                     });
}

}  // namespace acomp
