#include "doctest.h"

#include <cmath>
#include <random>

#include "acomp/ops.hpp"
#include "acceptance/gradient_suite.hpp"

using namespace acomp;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, 1.0f);
  std::vector<float> v(shape_numel(s));
  for (auto& x : v) x = d(rng);
  return Tensor(std::move(s), std::move(v));
}

// Six nested loops, no unfolding.
std::vector<double> direct_conv(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t o = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1, ow = (wd + 2 * pad - kw) / stride + 1;
  std::vector<double> y(n * o * oh * ow, 0.0);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t oc = 0; oc < o; ++oc)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j)
          for (std::size_t ic = 0; ic < c; ++ic)
            for (std::size_t p = 0; p < kh * kw; ++p) {
              const long r = static_cast<long>(i * stride + p / kw) - static_cast<long>(pad);
              const long q = static_cast<long>(j * stride + p % kw) - static_cast<long>(pad);
              if (r < 0 || q < 0 || r >= static_cast<long>(h) || q >= static_cast<long>(wd)) continue;
              y[((b * o + oc) * oh + i) * ow + j] +=
                  static_cast<double>(x[((b * c + ic) * h + static_cast<std::size_t>(r)) * wd + static_cast<std::size_t>(q)]) *
                  w[((oc * c + ic) * kh + p / kw) * kw + p % kw];
            }
  return y;
}

}  // namespace

TEST_CASE("conv of ones") {
  const Tensor y = conv2d(Tensor(Shape{1, 1, 3, 3}, 1.0f), Tensor(Shape{1, 1, 3, 3}, 1.0f));
  REQUIRE(y.shape() == Shape{1, 1, 1, 1});
  CHECK(y[0] == 9.0f);
}

TEST_CASE("identity 1x1 conv") {
  const Tensor x = random_tensor({2, 1, 4, 5}, 1);
  const Tensor y = conv2d(x, Tensor(Shape{1, 1, 1, 1}, 1.0f));
  CHECK(y.values() == x.values());
}

TEST_CASE("conv against nested loops") {
  const Tensor x = random_tensor({1, 2, 4, 4}, 2), w = random_tensor({3, 2, 3, 3}, 3);
  const auto ref = direct_conv(x, w, 1, 0);
  const Tensor y = conv2d(x, w);
  REQUIRE(y.numel() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(y[i] == doctest::Approx(ref[i]).epsilon(1e-5).scale(1.0));

  const Tensor x2 = random_tensor({2, 3, 7, 6}, 4), w2 = random_tensor({4, 3, 3, 3}, 5);
  const auto ref2 = direct_conv(x2, w2, 2, 1);
  const Tensor y2 = conv2d(x2, w2, Tensor(), {2, 1});
  REQUIRE(y2.numel() == ref2.size());
  for (std::size_t i = 0; i < ref2.size(); ++i) CHECK(y2[i] == doctest::Approx(ref2[i]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("conv rejects mismatched channels") {
  CHECK_THROWS(conv2d(Tensor(Shape{1, 2, 3, 3}), Tensor(Shape{1, 3, 3, 3})));
}

TEST_CASE("batchnorm on normalized input is near identity") {
  // Each channel exactly zero mean and unit variance over n*h*w.
  std::vector<float> v;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 8; ++i) v.push_back(i % 2 ? 1.0f : -1.0f);
  std::vector<float> nchw(16);
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 2; ++c)
      for (int p = 0; p < 4; ++p) nchw[(b * 2 + c) * 4 + p] = v[c * 8 + b * 4 + p];
  const Tensor x(Shape{2, 2, 2, 2}, nchw);
  BatchNormStats st(2);
  const Tensor y = batchnorm2d(x, Tensor(Shape{2}, 1.0f), Tensor(Shape{2}, 0.0f), st, true);
  for (std::size_t i = 0; i < 16; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-4));
}

TEST_CASE("batchnorm of a constant channel gives beta") {
  const Tensor x(Shape{3, 1, 2, 2}, 4.5f);
  BatchNormStats st(1);
  const Tensor y = batchnorm2d(x, Tensor(Shape{1}, 2.0f), Tensor(Shape{1}, -0.75f), st, true);
  for (float v : y.values()) CHECK(v == doctest::Approx(-0.75).epsilon(1e-4));
}

TEST_CASE("batchnorm against its formula") {
  const Tensor x = random_tensor({4, 3, 3, 2}, 6), gamma = random_tensor({3}, 7), beta = random_tensor({3}, 8);
  BatchNormStats st(3);
  const Tensor y = batchnorm2d(x, gamma, beta, st, true);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t p = 0; p < 6; ++p) mean += x[(b * 3 + c) * 6 + p];
    mean /= 24.0;
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t p = 0; p < 6; ++p) var += std::pow(x[(b * 3 + c) * 6 + p] - mean, 2);
    var /= 24.0;
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t p = 0; p < 6; ++p) {
        const std::size_t i = (b * 3 + c) * 6 + p;
        const double ref = (x[i] - mean) / std::sqrt(var + st.eps) * gamma[c] + beta[c];
        CHECK(y[i] == doctest::Approx(ref).epsilon(1e-5).scale(1.0));
      }
    CHECK(st.running_mean[c] == doctest::Approx(0.1 * mean).epsilon(1e-5));
  }
}

TEST_CASE("batchnorm eval mode uses running statistics") {
  BatchNormStats st(1);
  st.running_mean = {2.0f};
  st.running_var = {4.0f};
  const Tensor y = batchnorm2d(Tensor(Shape{1, 1, 1, 1}, 6.0f), Tensor(Shape{1}, 1.0f), Tensor(Shape{1}, 0.0f), st, false);
  CHECK(y[0] == doctest::Approx(4.0 / std::sqrt(4.0 + st.eps)));
  CHECK(st.running_mean[0] == 2.0f);
}

TEST_CASE("relu and softmax basics") {
  const Tensor r = relu(Tensor(Shape{3}, {-1, 0, 2}));
  CHECK(r.values() == std::vector<float>{0, 0, 2});
  const Tensor s = softmax(Tensor(Shape{2, 5}, 0.3f));
  for (float v : s.values()) CHECK(v == doctest::Approx(0.2));
  const Tensor big = softmax(Tensor(Shape{1, 2}, {1000.0f, 0.0f}));
  CHECK(big[0] == 1.0f);
  CHECK(std::isfinite(log_softmax(Tensor(Shape{1, 2}, {1000.0f, 0.0f}))[1]));
}

TEST_CASE("maxpool picks window maxima and routes the gradient") {
  Tensor x(Shape{1, 1, 2, 4}, {1, 5, 2, 0, 3, 4, 8, 7});
  x.set_requires_grad();
  const Tensor y = maxpool2d(x, 2);
  CHECK(y.values() == std::vector<float>{5, 8});
  sum(y).backward();
  CHECK(std::vector<float>(x.grad().begin(), x.grad().end()) == std::vector<float>{0, 1, 0, 0, 0, 0, 1, 0});
}

TEST_CASE("channel slice and concat invert each other") {
  const Tensor x = random_tensor({2, 5, 2, 3}, 9);
  const Tensor y = channel_concat({channel_slice(x, 0, 2), channel_slice(x, 2, 3), channel_slice(x, 3, 5)});
  CHECK(y.values() == x.values());
  CHECK_THROWS(channel_slice(x, 3, 6));
  CHECK_THROWS(channel_slice(x, 2, 2));
}

TEST_CASE("composite conv bn relu linear matches finite differences") {
  for (const auto& c : testing::gradient_cases()) {
    if (c.name != "conv_bn_relu_linear") continue;
    std::mt19937_64 rng(10);
    for (std::uint64_t s = 0; s < 5; ++s) CHECK(testing::directional_check(c.f, c.inputs(rng), s, c.step) < 1e-3);
  }
}
