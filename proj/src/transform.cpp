#include "acomp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "acomp/ops.hpp"

namespace acomp {

SymmetricEigen jacobi_eigen(std::vector<double> a, std::size_t d, int max_sweeps, double tol) {
  if (a.size() != d * d) throw std::invalid_argument("jacobi_eigen: matrix is not d x d");
  std::vector<double> v(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

  double frob = 0.0;
  for (double x : a) frob += x * x;
  const double threshold = tol * std::max(1.0, std::sqrt(frob));

  auto max_off = [&] {
    double m = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) m = std::max(m, std::fabs(a[p * d + q]));
    return m;
  };

  int sweep = 0;
  for (; sweep < max_sweeps && max_off() >= threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with the rotation in the (p, q) plane.
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k * d + p], akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[p * d + k], aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v[k * d + p], vkq = v[k * d + q];
          v[k * d + p] = c * vkp - s * vkq;
          v[k * d + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * d + x] > a[y * d + y]; });

  SymmetricEigen out;
  out.sweeps = sweep;
  out.values.resize(d);
  out.vectors.resize(d * d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a[src * d + src];
    std::size_t big = 0;
    for (std::size_t r = 1; r < d; ++r)
      if (std::fabs(v[r * d + src]) > std::fabs(v[big * d + src])) big = r;
    const double sign = v[big * d + src] < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < d; ++r) out.vectors[r * d + k] = sign * v[r * d + src];
  }
  return out;
}

TransformCache TransformCache::identity(std::size_t layer, std::size_t d) {
  TransformCache c;
  c.layer_id = layer;
  c.dim = d;
  c.basis.assign(d * d, 0.0f);
  for (std::size_t i = 0; i < d; ++i) c.basis[i * d + i] = 1.0f;
  c.eigenvalues.assign(d, 0.0f);
  c.channel_mean.assign(d, 0.0f);
  return c;
}

TransformCache fit_pca(const Tensor& samples, std::size_t layer_id) {
  if (samples.rank() != 4) {
    throw std::invalid_argument("fit_pca: expected n x d x h x w samples, got " +
                                shape_str(samples.shape()));
  }
  const std::size_t n = samples.dim(0), d = samples.dim(1), plane = samples.dim(2) * samples.dim(3);
  const std::size_t m = n * plane;
  if (m < d) {
    throw std::invalid_argument("fit_pca: " + std::to_string(m) + " observations for " +
                                std::to_string(d) + " channels (short by " +
                                std::to_string(d - m) + ")");
  }
  const float* x = samples.data().data();
  std::vector<double> mu(d, 0.0);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t c = 0; c < d; ++c) {
      const float* p = x + (b * d + c) * plane;
      double s = 0.0;
      for (std::size_t i = 0; i < plane; ++i) s += p[i];
      mu[c] += s;
    }
  for (auto& v : mu) v /= static_cast<double>(m);

  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centered(d * plane);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t c = 0; c < d; ++c) {
      const float* p = x + (b * d + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) centered[c * plane + i] = p[i] - mu[c];
    }
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = r; c < d; ++c) {
        const double* xr = centered.data() + r * plane;
        const double* xc = centered.data() + c * plane;
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) s += xr[i] * xc[i];
        cov[r * d + c] += s;
      }
  }
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r; c < d; ++c) {
      cov[r * d + c] /= static_cast<double>(m);
      cov[c * d + r] = cov[r * d + c];
    }

  const SymmetricEigen eig = jacobi_eigen(std::move(cov), d);
  TransformCache cache;
  cache.layer_id = layer_id;
  cache.dim = d;
  cache.sample_count = m;
  cache.basis.resize(d * d);
  for (std::size_t i = 0; i < d * d; ++i) cache.basis[i] = static_cast<float>(eig.vectors[i]);
  cache.eigenvalues.resize(d);
  for (std::size_t k = 0; k < d; ++k) cache.eigenvalues[k] = static_cast<float>(std::max(0.0, eig.values[k]));
  cache.channel_mean.resize(d);
  for (std::size_t c = 0; c < d; ++c) cache.channel_mean[c] = static_cast<float>(mu[c]);
  return cache;
}

namespace {

void check_dim(const char* op, const Tensor& a, const TransformCache& cache) {
  if (a.rank() != 4 || a.dim(1) != cache.dim || cache.basis.size() != cache.dim * cache.dim) {
    throw std::invalid_argument(std::string(op) + ": input " + shape_str(a.shape()) +
                                " does not match a " + std::to_string(cache.dim) +
                                "-channel transform");
  }
}

}  // namespace

Tensor apply_transform(const Tensor& a, const TransformCache& cache) {
  check_dim("apply_transform", a, cache);
  const std::size_t d = cache.dim;
  std::vector<float> ut(d * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) ut[c * d + r] = cache.basis[r * d + c];
  return channel_mix(a, ut, d, cache.channel_mean, {});
}

Tensor invert_transform(const Tensor& a_prime, const TransformCache& cache) {
  check_dim("invert_transform", a_prime, cache);
  return channel_mix(a_prime, cache.basis, cache.dim, {}, cache.channel_mean);
}

}  // namespace acomp
