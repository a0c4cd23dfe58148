#include "acomp/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "acomp/ops.hpp"

namespace acomp {

Tensor memory_loss(std::span<const GroupFootprint> groups, const LossConfig& cfg) {
  if (!(cfg.p > 0.0f)) throw std::invalid_argument("memory_loss: penalty p must be positive");
  if (!(cfg.normalization > 0.0f)) throw std::invalid_argument("memory_loss: normalization must be positive");
  Tensor total = Tensor::scalar(0.0f);
  bool any = false;
  for (const auto& g : groups) {
    if (g.channels == 0) continue;
    const float weight = cfg.p / cfg.normalization * static_cast<float>(g.channels * g.plane);
    Tensor term = scale(expected_bits_tensor(*g.state), weight);
    total = any ? add(total, term) : term;
    any = true;
  }
  return total;
}

Tensor kd_loss(const Tensor& student_logits, const Tensor& teacher_logits) {
  if (student_logits.shape() != teacher_logits.shape() || student_logits.rank() != 2) {
    throw std::invalid_argument("kd_loss: logits " + shape_str(student_logits.shape()) + " vs " +
                                shape_str(teacher_logits.shape()));
  }
  Tensor teacher_log_p;
  {
    NoGradGuard guard;
    teacher_log_p = log_softmax(teacher_logits.detach());
  }
  std::vector<float> p(teacher_log_p.numel());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(teacher_log_p[i]);
  const float batch = static_cast<float>(student_logits.dim(0));
  Tensor teacher_p(student_logits.shape(), std::move(p));
  // Elementwise p (log p - log q), so identical inputs give exactly zero.
  Tensor kl = sum(mul(teacher_p, sub(teacher_log_p, log_softmax(student_logits))));
  return scale(kl, 1.0f / batch);
}

Tensor total_loss(const Tensor& memory, const Tensor& kd) {
  if (memory.numel() != 1 || kd.numel() != 1) throw std::invalid_argument("total_loss: scalar terms expected");
  return add(memory, kd);
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw std::invalid_argument("cross_entropy: logits " + shape_str(logits.shape()) + " for " +
                                std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  std::vector<float> onehot(n * k, 0.0f);
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= k) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(labels[r]) + " outside [0, " +
                              std::to_string(k) + ")");
    }
    onehot[r * k + static_cast<std::size_t>(labels[r])] = 1.0f;
  }
  Tensor picked = sum(mul(Tensor(logits.shape(), std::move(onehot)), log_softmax(logits)));
  return scale(picked, -1.0f / static_cast<float>(n));
}

}  // namespace acomp
