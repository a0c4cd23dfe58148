#pragma once

#include <vector>

#include "acomp/tensor.hpp"

namespace acomp {

/// SGD with heavy-ball momentum: v <- m*v + grad, p <- p - lr*v.
class Sgd {
 public:
  Sgd(std::vector<Tensor> params, float lr, float momentum = 0.0f);

  void step();
  void zero_grad();
  // Forgets the momentum buffer of one parameter (matched by storage).
  void reset_momentum(const Tensor& param);

  float lr() const { return lr_; }
  void set_lr(float lr) { lr_ = lr; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<float>> velocity_;
  float lr_;
  float momentum_;
};

}  // namespace acomp
