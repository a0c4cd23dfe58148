#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace acomp {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl;

// Accumulates the incoming output gradient into the inputs captured by the
// closure.
using BackwardFn = std::function<void(std::span<const float> grad_out)>;

struct GraphNode {
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  BackwardFn backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<float> data;
  std::vector<float> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::shared_ptr<GraphNode> grad_fn;

  std::span<float> ensure_grad();
};

/// Dense row-major float tensor with an optional reverse-mode gradient.
///
/// Copies share storage. Use clone() for a deep copy and detach() to cut the
/// graph while keeping the values.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  static Tensor scalar(float v);

  const Shape& shape() const { return impl_->shape; }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->data.size(); }

  std::span<float> data() { return impl_->data; }
  std::span<const float> data() const { return impl_->data; }
  std::vector<float>& values() { return impl_->data; }
  const std::vector<float>& values() const { return impl_->data; }

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const float> grad() const { return impl_->grad; }
  std::span<float> grad_mut() { return impl_->ensure_grad(); }
  void zero_grad();

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on = true);
  bool is_leaf() const { return impl_->grad_fn == nullptr; }

  float item() const;
  float operator[](std::size_t i) const { return impl_->data[i]; }

  Tensor detach() const;
  Tensor clone() const;

  // Reverse-mode sweep from a scalar. Frees the recorded graph afterwards.
  void backward() const;
  // Same sweep seeded with d(objective)/d(this).
  void backward(std::span<const float> seed) const;

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  std::shared_ptr<TensorImpl> impl_;
};

// Records an op result. The node is attached only when grad mode is on and
// some input requires grad.
Tensor make_result(Shape shape, std::vector<float> values,
                   const std::vector<Tensor>& inputs, BackwardFn backward);

bool grad_enabled();

/// Disables graph recording for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace acomp
