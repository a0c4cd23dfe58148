#include "acomp/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace acomp::kernels {

namespace {

constexpr std::size_t kColBlock = 256;

typedef float v8 __attribute__((vector_size(32)));

inline v8 load8(const float* p) {
  v8 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store8(float* p, v8 v) { std::memcpy(p, &v, sizeof v); }

inline std::size_t blocks(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

// One column block of C = op(A) * B, all rows. A 4x16 tile of C stays in
// accumulators across the whole k loop. `a_at(i, kk)` reads op(A).
template <typename AAt>
inline void gemm_block(std::size_t jb, std::size_t m, std::size_t n, std::size_t k, AAt a_at,
                       const float* b, float* c, bool accumulate) {
  constexpr std::size_t R = 4, W = 16;
  const std::size_t j0 = jb * kColBlock;
  const std::size_t j1 = std::min(n, j0 + kColBlock);
  std::vector<float> apanel(R * k);
  for (std::size_t i = 0; i < m; i += R) {
    // A partial tile pads the missing rows with zeros and never stores them.
    const std::size_t rows = std::min(R, m - i);
    for (std::size_t kk = 0; kk < k; ++kk)
      for (std::size_t r = 0; r < R; ++r) apanel[kk * R + r] = r < rows ? a_at(i + r, kk) : 0.0f;
    std::size_t j = j0;
    for (; j + W <= j1; j += W) {
      v8 acc[R][2];
      for (std::size_t r = 0; r < R; ++r) {
        if (accumulate && r < rows) {
          acc[r][0] = load8(c + (i + r) * n + j);
          acc[r][1] = load8(c + (i + r) * n + j + 8);
        } else {
          acc[r][0] = v8{};
          acc[r][1] = v8{};
        }
      }
      for (std::size_t kk = 0; kk < k; ++kk) {
        const float* brow = b + kk * n + j;
        const v8 b0 = load8(brow), b1 = load8(brow + 8);
        const float* av = apanel.data() + kk * R;
        for (std::size_t r = 0; r < R; ++r) {
          acc[r][0] += av[r] * b0;
          acc[r][1] += av[r] * b1;
        }
      }
      for (std::size_t r = 0; r < rows; ++r) {
        store8(c + (i + r) * n + j, acc[r][0]);
        store8(c + (i + r) * n + j + 8, acc[r][1]);
      }
    }
    for (; j < j1; ++j) {
      for (std::size_t r = 0; r < rows; ++r) {
        float v = accumulate ? c[(i + r) * n + j] : 0.0f;
        for (std::size_t kk = 0; kk < k; ++kk) v += apanel[kk * R + r] * b[kk * n + j];
        c[(i + r) * n + j] = v;
      }
    }
  }
}

inline float reduce8(v8 acc) {
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

// Eight interleaved partial sums, then a fixed reduction tree.
inline float dot8(const float* x, const float* y, std::size_t len) {
  v8 acc{};
  std::size_t p = 0;
  for (; p + 8 <= len; p += 8) acc += load8(x + p) * load8(y + p);
  float tail = 0.0f;
  for (; p < len; ++p) tail += x[p] * y[p];
  return reduce8(acc) + tail;
}

// Four dot products against the same y, each summed exactly like dot8.
inline void dot8x4(const float* x0, const float* x1, const float* x2, const float* x3,
                   const float* y, std::size_t len, float* out) {
  v8 acc0{}, acc1{}, acc2{}, acc3{};
  std::size_t p = 0;
  for (; p + 8 <= len; p += 8) {
    const v8 yv = load8(y + p);
    acc0 += load8(x0 + p) * yv;
    acc1 += load8(x1 + p) * yv;
    acc2 += load8(x2 + p) * yv;
    acc3 += load8(x3 + p) * yv;
  }
  float tail[4] = {0, 0, 0, 0};
  for (; p < len; ++p) {
    tail[0] += x0[p] * y[p];
    tail[1] += x1[p] * y[p];
    tail[2] += x2[p] * y[p];
    tail[3] += x3[p] * y[p];
  }
  out[0] = reduce8(acc0) + tail[0];
  out[1] = reduce8(acc1) + tail[1];
  out[2] = reduce8(acc2) + tail[2];
  out[3] = reduce8(acc3) + tail[3];
}

// Rows [i0, i0 + rows) of C = A * B^T.
inline void gemm_nt_rows(std::size_t i0, std::size_t rows, std::size_t n, std::size_t k,
                         const float* a, const float* b, float* c, bool accumulate) {
  std::size_t i = i0;
  const std::size_t end = i0 + rows;
  for (; i + 4 <= end; i += 4) {
    const float* x = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      float v[4];
      dot8x4(x, x + k, x + 2 * k, x + 3 * k, b + j * k, k, v);
      for (std::size_t r = 0; r < 4; ++r) {
        float& dst = c[(i + r) * n + j];
        dst = accumulate ? dst + v[r] : v[r];
      }
    }
  }
  for (; i < end; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const float v = dot8(a + i * k, b + j * k, k);
      c[i * n + j] = accumulate ? c[i * n + j] + v : v;
    }
  }
}

inline void im2col_row(const ConvGeometry& g, std::size_t row, const float* input, float* cols) {
  const std::size_t oh = g.out_h(), ow = g.out_w();
  const std::size_t ncols = g.columns();
  const std::size_t c = row / (g.kernel_h * g.kernel_w);
  const std::size_t ky = (row / g.kernel_w) % g.kernel_h;
  const std::size_t kx = row % g.kernel_w;
  float* out = cols + row * ncols;
  for (std::size_t b = 0; b < g.batch; ++b) {
    const float* plane = input + (b * g.in_channels + c) * g.in_h * g.in_w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
      float* dst = out + (b * oh + oy) * ow;
      if (iy < 0 || iy >= static_cast<long>(g.in_h)) {
        std::fill(dst, dst + ow, 0.0f);
        continue;
      }
      const float* src = plane + static_cast<std::size_t>(iy) * g.in_w;
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
        dst[ox] = (ix < 0 || ix >= static_cast<long>(g.in_w)) ? 0.0f
                                                                : src[static_cast<std::size_t>(ix)];
      }
    }
  }
}

// All patch rows belonging to input channel c scatter into that channel only.
inline void col2im_channel(const ConvGeometry& g, std::size_t c, const float* cols,
                           float* input_grad) {
  const std::size_t oh = g.out_h(), ow = g.out_w();
  const std::size_t ncols = g.columns();
  for (std::size_t ky = 0; ky < g.kernel_h; ++ky) {
    for (std::size_t kx = 0; kx < g.kernel_w; ++kx) {
      const std::size_t row = (c * g.kernel_h + ky) * g.kernel_w + kx;
      const float* src_row = cols + row * ncols;
      for (std::size_t b = 0; b < g.batch; ++b) {
        float* plane = input_grad + (b * g.in_channels + c) * g.in_h * g.in_w;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
          if (iy < 0 || iy >= static_cast<long>(g.in_h)) continue;
          const float* src = src_row + (b * oh + oy) * ow;
          float* dst = plane + static_cast<std::size_t>(iy) * g.in_w;
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
            if (ix < 0 || ix >= static_cast<long>(g.in_w)) continue;
            dst[static_cast<std::size_t>(ix)] += src[ox];
          }
        }
      }
    }
  }
}

inline void channel_mix_item(std::size_t item, std::size_t in_channels, std::size_t out_channels,
                             std::size_t plane, const float* matrix, const float* pre,
                             const float* post, const float* x, float* y) {
  const std::size_t b = item / out_channels;
  const std::size_t o = item % out_channels;
  float* dst = y + (b * out_channels + o) * plane;
  const float bias = post ? post[o] : 0.0f;
  std::fill(dst, dst + plane, bias);
  for (std::size_t i = 0; i < in_channels; ++i) {
    const float w = matrix[o * in_channels + i];
    const float shift = pre ? pre[i] : 0.0f;
    const float* src = x + (b * in_channels + i) * plane;
    for (std::size_t p = 0; p < plane; ++p) dst[p] += w * (src[p] - shift);
  }
}

}  // namespace

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate) {
  const auto nb = static_cast<long>(blocks(n, kColBlock));
  auto a_at = [a, k](std::size_t i, std::size_t kk) { return a[i * k + kk]; };
#pragma omp parallel for schedule(static)
  for (long jb = 0; jb < nb; ++jb) gemm_block(static_cast<std::size_t>(jb), m, n, k, a_at, b, c, accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate) {
  const auto nb = static_cast<long>(blocks(n, kColBlock));
  auto a_at = [a, m](std::size_t i, std::size_t kk) { return a[kk * m + i]; };
#pragma omp parallel for schedule(static)
  for (long jb = 0; jb < nb; ++jb) gemm_block(static_cast<std::size_t>(jb), m, n, k, a_at, b, c, accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate) {
  const auto tiles = static_cast<long>(blocks(m, 4));
#pragma omp parallel for schedule(static)
  for (long t = 0; t < tiles; ++t) {
    const auto i0 = static_cast<std::size_t>(t) * 4;
    gemm_nt_rows(i0, std::min<std::size_t>(4, m - i0), n, k, a, b, c, accumulate);
  }
}

void im2col(const ConvGeometry& g, const float* input, float* cols) {
  const auto rows = static_cast<long>(g.patch());
#pragma omp parallel for schedule(static)
  for (long r = 0; r < rows; ++r) im2col_row(g, static_cast<std::size_t>(r), input, cols);
}

void col2im(const ConvGeometry& g, const float* cols, float* input_grad) {
  const auto channels = static_cast<long>(g.in_channels);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < channels; ++c) col2im_channel(g, static_cast<std::size_t>(c), cols, input_grad);
}

void channel_mix(std::size_t batch, std::size_t in_channels, std::size_t out_channels,
                 std::size_t plane, const float* matrix, const float* pre, const float* post,
                 const float* x, float* y) {
  const auto items = static_cast<long>(batch * out_channels);
#pragma omp parallel for schedule(static)
  for (long it = 0; it < items; ++it) {
    channel_mix_item(static_cast<std::size_t>(it), in_channels, out_channels, plane, matrix, pre,
                     post, x, y);
  }
}

namespace serial {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate) {
  auto a_at = [a, k](std::size_t i, std::size_t kk) { return a[i * k + kk]; };
  for (std::size_t jb = 0; jb < blocks(n, kColBlock); ++jb) gemm_block(jb, m, n, k, a_at, b, c, accumulate);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate) {
  auto a_at = [a, m](std::size_t i, std::size_t kk) { return a[kk * m + i]; };
  for (std::size_t jb = 0; jb < blocks(n, kColBlock); ++jb) gemm_block(jb, m, n, k, a_at, b, c, accumulate);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate) {
  for (std::size_t i0 = 0; i0 < m; i0 += 4) gemm_nt_rows(i0, std::min<std::size_t>(4, m - i0), n, k, a, b, c, accumulate);
}

void im2col(const ConvGeometry& g, const float* input, float* cols) {
  for (std::size_t r = 0; r < g.patch(); ++r) im2col_row(g, r, input, cols);
}

void col2im(const ConvGeometry& g, const float* cols, float* input_grad) {
  for (std::size_t c = 0; c < g.in_channels; ++c) col2im_channel(g, c, cols, input_grad);
}

void channel_mix(std::size_t batch, std::size_t in_channels, std::size_t out_channels,
                 std::size_t plane, const float* matrix, const float* pre, const float* post,
                 const float* x, float* y) {
  for (std::size_t it = 0; it < batch * out_channels; ++it) {
    channel_mix_item(it, in_channels, out_channels, plane, matrix, pre, post, x, y);
  }
}

}  // namespace serial

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace acomp::kernels
