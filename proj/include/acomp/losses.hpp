#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "acomp/quantization.hpp"
#include "acomp/tensor.hpp"

namespace acomp {

struct LossConfig {
  float p = 0.05f;              // penalty strength
  float normalization = 1.0f;   // Z; the total activation value count turns the penalty into avg bits
};

// Storage footprint of one quantized (layer, group): d_{l,g} channels of
// h_l * w_l values each. Pruned groups are simply left out.
struct GroupFootprint {
  const MPModuleState* state = nullptr;
  std::size_t channels = 0;
  std::size_t plane = 0;
};

// p / Z * sum over groups of (sum_i pi_i b_i) * d * h * w.
Tensor memory_loss(std::span<const GroupFootprint> groups, const LossConfig& cfg);

// KL(teacher || student) over softmax distributions, averaged over the batch.
// The teacher is treated as a constant.
Tensor kd_loss(const Tensor& student_logits, const Tensor& teacher_logits);

Tensor total_loss(const Tensor& memory, const Tensor& kd);

// Mean negative log-likelihood of integer labels; used to train the baseline.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

}  // namespace acomp
