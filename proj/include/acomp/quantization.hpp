#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "acomp/tensor.hpp"

namespace acomp {

struct Calibration {
  float lo = 0.0f;
  float hi = 1.0f;
};

/// Asymmetric uniform quantizer over a clamp range.
///
/// Values are clamped to [lo, hi], mapped onto the integer grid
/// {0, ..., 2^bits - 1} with round-half-away-from-zero, and mapped back.
struct UniformQuantizer {
  int bit_width = 8;
  Calibration range;

  void validate() const;
  std::size_t levels() const { return std::size_t{1} << bit_width; }
  // Grid value of integer level k.
  float level(std::size_t k) const;
  float apply(float x) const;
};

// Straight-through quantization: the backward pass copies the gradient where
// lo <= x <= hi and zeroes it outside.
Tensor quantize(const Tensor& x, const UniformQuantizer& q);

// Symmetric per-tensor quantizer covering [-max|w|, max|w|].
UniformQuantizer weight_quantizer(std::span<const float> weights, int bit_width);

enum class MixMode { soft, hard };

/// One learnable mixed-precision module: N quantizer branches for one
/// (layer, group) with architecture parameters beta.
struct MPModuleState {
  std::size_t layer_id = 0;
  std::size_t group_id = 0;
  std::vector<int> bits;  // strictly ascending
  Tensor beta;            // [N], trainable
  float temperature = 1.0f;  // pi = softmax(beta / temperature)

  MPModuleState() = default;
  MPModuleState(std::size_t layer, std::size_t group, std::vector<int> branch_bits);

  std::size_t branches() const { return bits.size(); }
  // softmax(beta / temperature), as a graph node and as plain values.
  Tensor mixing_tensor() const;
  std::vector<float> mixing_weights() const;
  // Largest mixing weight; ties go to the lowest index (lowest bit-width).
  std::size_t argmax_branch() const;
  int chosen_bits() const { return bits[argmax_branch()]; }
};

void validate_bits(const std::vector<int>& bits);

// Soft: sum_i pi_i * Q_i(x), differentiable in beta and (through the STE) in x.
// Hard: Q_k(x) with k the argmax branch.
Tensor mix_forward(const Tensor& a_prime, const MPModuleState& state, const Calibration& range,
                   MixMode mode);

// sum_i pi_i * Q_{bits_i}(x) as one node; x gets the straight-through gradient
// scaled by sum(pi), pi gets sum_j g_j * Q_i(x_j).
Tensor soft_mix(const Tensor& x, const Tensor& pi, const std::vector<int>& bits,
                const Calibration& range);

// sum_i pi_i * b_i as a value, and as a graph node differentiable in beta.
float expected_bits(const MPModuleState& state);
Tensor expected_bits_tensor(const MPModuleState& state);

/// Exponential moving average of batch min/max, the calibration source for
/// activation quantizers.
class RangeTracker {
 public:
  explicit RangeTracker(float decay = 0.99f) : decay_(decay) {}

  void observe(std::span<const float> values);
  bool initialized() const { return initialized_; }
  Calibration range() const;
  void set(Calibration c) {
    lo_ = c.lo;
    hi_ = c.hi;
    initialized_ = true;
  }

 private:
  float decay_;
  bool initialized_ = false;
  float lo_ = 0.0f;
  float hi_ = 0.0f;
};

}  // namespace acomp
