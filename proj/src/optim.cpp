#include "acomp/optim.hpp"

#include <algorithm>

namespace acomp {

Sgd::Sgd(std::vector<Tensor> params, float lr, float momentum)
    : params_(std::move(params)), lr_(lr), momentum_(momentum) {
  for (const auto& p : params_) velocity_.emplace_back(p.numel(), 0.0f);
}

void Sgd::step() {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto& v = velocity_[k];
    auto w = p.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      v[i] = momentum_ * v[i] + g[i];
      w[i] -= lr_ * v[i];
    }
  }
}

void Sgd::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Sgd::reset_momentum(const Tensor& param) {
  for (std::size_t k = 0; k < params_.size(); ++k)
    if (params_[k].same_storage(param)) std::fill(velocity_[k].begin(), velocity_[k].end(), 0.0f);
}

}  // namespace acomp
