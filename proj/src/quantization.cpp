#include "acomp/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "acomp/ops.hpp"

namespace acomp {

void UniformQuantizer::validate() const {
  if (bit_width < 1 || bit_width > 16) {
    throw std::invalid_argument("quantizer: bit width " + std::to_string(bit_width) +
                                " outside [1, 16]");
  }
  if (!(range.lo < range.hi)) {
    throw std::invalid_argument("quantizer: empty range [" + std::to_string(range.lo) + ", " +
                                std::to_string(range.hi) + "]");
  }
}

float UniformQuantizer::level(std::size_t k) const {
  const double steps = static_cast<double>(levels() - 1);
  const double lo = range.lo, hi = range.hi;
  return static_cast<float>(lo + static_cast<double>(k) * (hi - lo) / steps);
}

float UniformQuantizer::apply(float x) const {
  const double lo = range.lo, hi = range.hi;
  const double steps = static_cast<double>(levels() - 1);
  const double clamped = std::clamp(static_cast<double>(x), lo, hi);
  // t >= 0, so std::round is round-half-away-from-zero here.
  const double k = std::round((clamped - lo) / (hi - lo) * steps);
  return static_cast<float>(lo + k * (hi - lo) / steps);
}

Tensor quantize(const Tensor& x, const UniformQuantizer& q) {
  q.validate();
  std::vector<float> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = q.apply(x[i]);
  auto xi = x.impl();
  const Calibration r = q.range;
  return make_result(x.shape(), std::move(out), {x}, [xi, r](std::span<const float> g) {
    if (!xi->requires_grad) return;
    auto gx = xi->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const float v = xi->data[i];
      if (v >= r.lo && v <= r.hi) gx[i] += g[i];
    }
  });
}

UniformQuantizer weight_quantizer(std::span<const float> weights, int bit_width) {
  float m = 0.0f;
  for (float w : weights) m = std::max(m, std::fabs(w));
  if (m == 0.0f) m = 1e-8f;
  return UniformQuantizer{bit_width, {-m, m}};
}

void validate_bits(const std::vector<int>& bits) {
  if (bits.empty()) throw std::invalid_argument("mp module: no branches");
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] < 1) throw std::invalid_argument("mp module: bit width below 1");
    if (i > 0 && bits[i] <= bits[i - 1]) {
      throw std::invalid_argument("mp module: branch bit widths must be strictly ascending");
    }
  }
}

MPModuleState::MPModuleState(std::size_t layer, std::size_t group, std::vector<int> branch_bits)
    : layer_id(layer), group_id(group), bits(std::move(branch_bits)) {
  validate_bits(bits);
  beta = Tensor(Shape{bits.size()}, 0.0f);
  beta.set_requires_grad(true);
}

Tensor MPModuleState::mixing_tensor() const {
  if (temperature == 1.0f) return softmax(beta);
  return softmax(scale(beta, 1.0f / temperature));
}

std::vector<float> MPModuleState::mixing_weights() const {
  NoGradGuard guard;
  return mixing_tensor().values();
}

std::size_t MPModuleState::argmax_branch() const {
  const auto pi = mixing_weights();
  std::size_t best = 0;
  for (std::size_t i = 1; i < pi.size(); ++i)
    if (pi[i] > pi[best]) best = i;
  return best;
}

Tensor mix_forward(const Tensor& a_prime, const MPModuleState& state, const Calibration& range,
                   MixMode mode) {
  if (a_prime.numel() == 0) throw std::invalid_argument("mix_forward: empty group slice");
  if (state.beta.numel() != state.bits.size()) {
    throw std::invalid_argument("mix_forward: beta/bits length mismatch");
  }
  if (mode == MixMode::hard) {
    return quantize(a_prime, UniformQuantizer{state.chosen_bits(), range});
  }
  return soft_mix(a_prime, state.mixing_tensor(), state.bits, range);
}

Tensor soft_mix(const Tensor& x, const Tensor& pi, const std::vector<int>& bits,
                const Calibration& range) {
  const std::size_t n = bits.size();
  if (pi.numel() != n) throw std::invalid_argument("soft_mix: pi/bits length mismatch");
  std::vector<UniformQuantizer> qs;
  for (int b : bits) {
    qs.push_back(UniformQuantizer{b, range});
    qs.back().validate();
  }
  const double lo = range.lo, hi = range.hi, span = hi - lo;
  std::vector<double> steps(n);
  for (std::size_t i = 0; i < n; ++i) steps[i] = static_cast<double>(qs[i].levels() - 1);
  // Same arithmetic as UniformQuantizer::apply, with the clamp shared by all branches.
  auto branch = [lo, span, steps](double t, std::size_t i) {
    return static_cast<float>(lo + std::round(t * steps[i]) * span / steps[i]);
  };
  const auto w = pi.values();
  std::vector<float> out(x.numel());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double t = (std::clamp(static_cast<double>(x[j]), lo, hi) - lo) / span;
    float acc = w[0] * branch(t, 0);
    for (std::size_t i = 1; i < n; ++i) acc += w[i] * branch(t, i);
    out[j] = acc;
  }
  auto xi = x.impl();
  auto pii = pi.impl();
  return make_result(x.shape(), std::move(out), {x, pi},
                     [xi, pii, range, branch, n](std::span<const float> g) {
    const double lo = range.lo, hi = range.hi;
    if (xi->requires_grad) {
      float total = 0.0f;
      for (float v : pii->data) total += v;
      auto gx = xi->ensure_grad();
      for (std::size_t j = 0; j < gx.size(); ++j) {
        const float v = xi->data[j];
        if (v >= range.lo && v <= range.hi) gx[j] += g[j] * total;
      }
    }
    if (pii->requires_grad) {
      std::vector<double> acc(n, 0.0);
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (g[j] == 0.0f) continue;
        const double t = (std::clamp(static_cast<double>(xi->data[j]), lo, hi) - lo) / (hi - lo);
        for (std::size_t i = 0; i < n; ++i) acc[i] += static_cast<double>(g[j]) * branch(t, i);
      }
      auto gp = pii->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) gp[i] += static_cast<float>(acc[i]);
    }
  });
}

float expected_bits(const MPModuleState& state) {
  const auto pi = state.mixing_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) acc += static_cast<double>(pi[i]) * state.bits[i];
  return static_cast<float>(acc);
}

Tensor expected_bits_tensor(const MPModuleState& state) {
  std::vector<float> b(state.bits.begin(), state.bits.end());
  const std::size_t n = b.size();
  return sum(mul(state.mixing_tensor(), Tensor(Shape{n}, std::move(b))));
}

void RangeTracker::observe(std::span<const float> values) {
  if (values.empty()) return;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (!initialized_) {
    lo_ = *mn;
    hi_ = *mx;
    initialized_ = true;
    return;
  }
  lo_ = decay_ * lo_ + (1.0f - decay_) * *mn;
  hi_ = decay_ * hi_ + (1.0f - decay_) * *mx;
}

Calibration RangeTracker::range() const {
  Calibration c{lo_, hi_};
  if (!(c.hi - c.lo > 1e-6f)) {
    const float mid = 0.5f * (c.lo + c.hi);
    c.lo = mid - 1e-3f;
    c.hi = mid + 1e-3f;
  }
  return c;
}

}  // namespace acomp
