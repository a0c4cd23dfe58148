#include "doctest.h"

#include <cmath>

#include "acomp/losses.hpp"
#include "acomp/ops.hpp"

using namespace acomp;

namespace {

MPModuleState with_pi(std::vector<float> pi, std::vector<int> bits) {
  MPModuleState m(0, 0, std::move(bits));
  for (std::size_t i = 0; i < pi.size(); ++i) m.beta.values()[i] = std::log(pi[i]);
  return m;
}

}  // namespace

TEST_CASE("memory loss by hand") {
  const auto m = with_pi({0.5f, 0.3f, 0.2f}, {6, 7, 8});
  const std::vector<GroupFootprint> g{{&m, 2, 16}};
  const float v = memory_loss(g, {1.0f, 1.0f}).item();
  CHECK(std::abs(v - 214.4f) / 214.4f < 1e-5f);
}

TEST_CASE("memory loss with only pruned groups is zero") {
  const auto m = with_pi({0.5f, 0.3f, 0.2f}, {6, 7, 8});
  const std::vector<GroupFootprint> g{{&m, 0, 16}};
  CHECK(memory_loss(g, {1.0f, 1.0f}).item() == 0.0f);
  CHECK_THROWS(memory_loss(g, {0.0f, 1.0f}));
}

TEST_CASE("one-hot mixing gives the exact storage bit count") {
  MPModuleState a(0, 0, {2, 3, 4}), b(0, 1, {5, 6, 7});
  a.beta.values() = {0.0f, 200.0f, 0.0f};
  b.beta.values() = {0.0f, 0.0f, 200.0f};
  const std::vector<GroupFootprint> g{{&a, 3, 4}, {&b, 5, 4}};
  const float p = 0.25f, z = 64.0f;
  const float exact = p / z * static_cast<float>(3 * 3 * 4 + 7 * 5 * 4);
  CHECK(std::abs(memory_loss(g, {p, z}).item() - exact) / exact < 1e-5f);
}

TEST_CASE("memory loss gradient flows into beta") {
  auto m = with_pi({0.5f, 0.3f, 0.2f}, {6, 7, 8});
  const std::vector<GroupFootprint> g{{&m, 2, 16}};
  memory_loss(g, {1.0f, 1.0f}).backward();
  const auto pi = m.mixing_weights();
  const float eb = 6.7f;
  for (int i = 0; i < 3; ++i) CHECK(m.beta.grad()[i] == doctest::Approx(32.0f * pi[i] * (m.bits[i] - eb)).epsilon(1e-4));
}

TEST_CASE("distillation loss by hand") {
  // Teacher as reference distribution: p = (2/3, 1/3), q = (1/2, 1/2).
  Tensor t({1, 2}, {std::log(2.0f), 0.0f});
  Tensor s({1, 2}, {0.0f, 0.0f});
  const double expect = 2.0 / 3.0 * std::log(4.0 / 3.0) + 1.0 / 3.0 * std::log(2.0 / 3.0);
  CHECK(kd_loss(s, t).item() == doctest::Approx(expect).epsilon(1e-5));
  CHECK(expect == doctest::Approx(0.056633).epsilon(1e-4));
}

TEST_CASE("distillation loss of a model against itself vanishes") {
  Tensor x({3, 4}, {1, -2, 0.5f, 3, 0, 0, 0, 0, 9, -9, 1, 2});
  CHECK(kd_loss(x, x).item() < 1e-8f);
  Tensor y({3, 4}, {0, 1, 2, 3, 3, 2, 1, 0, -1, 4, 0, 0});
  CHECK(kd_loss(y, x).item() >= 0.0f);
  CHECK(kd_loss(x, y).item() >= 0.0f);
  CHECK_THROWS(kd_loss(x, Tensor({4, 3})));
}

TEST_CASE("distillation gradient is softmax difference") {
  Tensor s({1, 3}, {0.2f, -0.1f, 0.4f});
  s.set_requires_grad(true);
  Tensor t({1, 3}, {1.0f, 0.0f, -1.0f});
  kd_loss(s, t).backward();
  const auto q = softmax(s.detach());
  const auto p = softmax(t);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.grad()[i] == doctest::Approx(q[i] - p[i]).epsilon(1e-5));
}

TEST_CASE("total loss is a plain sum") {
  CHECK(total_loss(Tensor::scalar(0.0f), Tensor::scalar(0.0f)).item() == 0.0f);
  CHECK(total_loss(Tensor::scalar(0.3f), Tensor::scalar(0.7f)).item() == doctest::Approx(1.0));
  CHECK_THROWS(total_loss(Tensor({2}), Tensor::scalar(0.0f)));
}

TEST_CASE("cross entropy") {
  Tensor x({2, 2}, {0.0f, 0.0f, 0.0f, 0.0f});
  const std::vector<int> y{0, 1};
  CHECK(cross_entropy(x, y).item() == doctest::Approx(std::log(2.0)));
  const std::vector<int> bad{0, 2};
  CHECK_THROWS(cross_entropy(x, bad));
}
