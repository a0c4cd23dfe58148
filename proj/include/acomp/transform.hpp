#pragma once

#include <cstddef>
#include <vector>

#include "acomp/tensor.hpp"

namespace acomp {

struct SymmetricEigen {
  std::vector<double> values;   // descending
  std::vector<double> vectors;  // d x d row-major, column k pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi rotations on a symmetric d x d matrix (row-major). Stops when
// the largest off-diagonal magnitude drops below tol * max(1, ||A||_F) or after
// max_sweeps. Eigenpairs are sorted by descending value and each vector's
// largest-magnitude entry is made positive.
SymmetricEigen jacobi_eigen(std::vector<double> matrix, std::size_t d, int max_sweeps = 100,
                            double tol = 1e-10);

/// Per-layer PCA basis of an activation's channel dimension.
struct TransformCache {
  std::size_t layer_id = 0;
  std::size_t dim = 0;
  std::vector<float> basis;        // d x d row-major; columns are principal directions
  std::vector<float> eigenvalues;  // descending, clipped at 0
  std::vector<float> channel_mean;
  std::size_t sample_count = 0;

  static TransformCache identity(std::size_t layer, std::size_t d);
};

// PCA over the channel axis of n x d x h x w samples (n*h*w observations of a
// d-vector). Covariance is normalized by the observation count.
TransformCache fit_pca(const Tensor& samples, std::size_t layer_id = 0);

// A' = U^T (A - mean), channel-wise; exact gradient into `a`.
Tensor apply_transform(const Tensor& a, const TransformCache& cache);
// A = U A' + mean.
Tensor invert_transform(const Tensor& a_prime, const TransformCache& cache);

}  // namespace acomp
