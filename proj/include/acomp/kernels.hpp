#pragma once

#include <cstddef>
#include <span>

// Dense compute kernels. Every kernel exists twice: an OpenMP version used by
// the ops and a plain serial version in `serial::` that the tests and the
// benchmark compare against. Work is split over output rows only, so both
// versions sum in the same order and agree bit for bit.
namespace acomp::kernels {

struct ConvGeometry {
  std::size_t batch = 0;
  std::size_t in_channels = 0;
  std::size_t in_h = 0;
  std::size_t in_w = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_h() const { return (in_h + 2 * padding - kernel_h) / stride + 1; }
  std::size_t out_w() const { return (in_w + 2 * padding - kernel_w) / stride + 1; }
  std::size_t patch() const { return in_channels * kernel_h * kernel_w; }
  std::size_t columns() const { return batch * out_h() * out_w(); }
};

// C[M,N] (+)= A[M,K] * B[K,N]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate);
// C[M,N] (+)= A[K,M]^T * B[K,N]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate);
// C[M,N] (+)= A[M,K] * B[N,K]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate);

// Unfolds an NCHW batch into a [patch, batch*out_h*out_w] column matrix.
void im2col(const ConvGeometry& g, const float* input, float* cols);
// Adjoint of im2col: scatters columns back into an NCHW gradient (accumulating).
void col2im(const ConvGeometry& g, const float* cols, float* input_grad);

// y[n,o,p] = sum_i M[o,i] * (x[n,i,p] - pre[i]) + post[o], for NCHW tensors
// flattened to [n, channels, plane].
void channel_mix(std::size_t batch, std::size_t in_channels, std::size_t out_channels,
                 std::size_t plane, const float* matrix, const float* pre, const float* post,
                 const float* x, float* y);

namespace serial {
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
             float* c, bool accumulate);
void im2col(const ConvGeometry& g, const float* input, float* cols);
void col2im(const ConvGeometry& g, const float* cols, float* input_grad);
void channel_mix(std::size_t batch, std::size_t in_channels, std::size_t out_channels,
                 std::size_t plane, const float* matrix, const float* pre, const float* post,
                 const float* x, float* y);
}  // namespace serial

int max_threads();

}  // namespace acomp::kernels
