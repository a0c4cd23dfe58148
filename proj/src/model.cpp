#include "acomp/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "acomp/quantization.hpp"

namespace acomp {

namespace {

Tensor kaiming(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
  std::vector<float> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  Tensor t(std::move(shape), std::move(v));
  t.set_requires_grad(true);
  return t;
}

Tensor filled(std::size_t n, float value) {
  Tensor t(Shape{n}, value);
  t.set_requires_grad(true);
  return t;
}

Tensor maybe_quantized(const Tensor& w, int bits) {
  if (bits <= 0) return w;
  return quantize(w, weight_quantizer(w.data(), bits));
}

}  // namespace

DeskCnn::DeskCnn(std::uint64_t seed, int num_classes, std::size_t in_channels, std::size_t image_side)
    : num_classes_(num_classes) {
  if (image_side % 8 != 0) throw std::invalid_argument("DeskCnn: image side must be a multiple of 8");
  std::mt19937_64 rng(seed);
  const std::size_t widths[kConvLayers] = {16, 32, 32, 64};
  const bool pools[kConvLayers] = {true, true, false, true};
  std::size_t in = in_channels, side = image_side;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    ConvBlock b;
    b.weight = kaiming(Shape{widths[l], in, 3, 3}, in * 9, rng);
    b.gamma = filled(widths[l], 1.0f);
    b.beta = filled(widths[l], 0.0f);
    b.stats = BatchNormStats(widths[l]);
    b.pool = pools[l];
    blocks_.push_back(std::move(b));
    dims_.push_back({widths[l], side, side});
    if (pools[l]) side /= 2;
    in = widths[l];
  }
  const std::size_t flat = in * side * side;
  fc1_w = kaiming(Shape{64, flat}, flat, rng);
  fc1_b = filled(64, 0.0f);
  fc2_w = kaiming(Shape{static_cast<std::size_t>(num_classes), 64}, 64, rng);
  fc2_b = filled(static_cast<std::size_t>(num_classes), 0.0f);
  normalization.mean.assign(in_channels, 0.0f);
  normalization.stddev.assign(in_channels, 1.0f);
}

Tensor DeskCnn::forward(const Tensor& x, const ForwardOptions& options) const {
  Tensor h = x;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const ConvBlock& b = blocks_[l];
    h = conv2d(h, maybe_quantized(b.weight, options.weight_bits), Tensor(), {1, 1});
    h = batchnorm2d(h, b.gamma, b.beta, b.stats, options.train_bn);
    if (options.hook) h = (*options.hook)(l, h);
    h = relu(h);
    if (b.pool) h = maxpool2d(h, 2);
  }
  h = flatten(h);
  h = relu(linear(h, maybe_quantized(fc1_w, options.weight_bits), fc1_b));
  return linear(h, maybe_quantized(fc2_w, options.weight_bits), fc2_b);
}

std::vector<Tensor> DeskCnn::parameters() const {
  std::vector<Tensor> p;
  for (const auto& b : blocks_) {
    p.push_back(b.weight);
    p.push_back(b.gamma);
    p.push_back(b.beta);
  }
  p.insert(p.end(), {fc1_w, fc1_b, fc2_w, fc2_b});
  return p;
}

NamedTensors DeskCnn::state() const {
  NamedTensors out;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto& b = blocks_[l];
    const std::string pre = "conv" + std::to_string(l + 1);
    const std::string bn = "bn" + std::to_string(l + 1);
    out.emplace_back(pre + ".weight", b.weight.detach());
    out.emplace_back(bn + ".gamma", b.gamma.detach());
    out.emplace_back(bn + ".beta", b.beta.detach());
    out.emplace_back(bn + ".running_mean", Tensor(Shape{b.stats.running_mean.size()}, b.stats.running_mean));
    out.emplace_back(bn + ".running_var", Tensor(Shape{b.stats.running_var.size()}, b.stats.running_var));
  }
  out.emplace_back("fc1.weight", fc1_w.detach());
  out.emplace_back("fc1.bias", fc1_b.detach());
  out.emplace_back("fc2.weight", fc2_w.detach());
  out.emplace_back("fc2.bias", fc2_b.detach());
  out.emplace_back("input.mean", Tensor(Shape{normalization.mean.size()}, normalization.mean));
  out.emplace_back("input.std", Tensor(Shape{normalization.stddev.size()}, normalization.stddev));
  return out;
}

void DeskCnn::load(const NamedTensors& named) {
  auto find = [&](const std::string& name) -> const Tensor& {
    for (const auto& [n, t] : named)
      if (n == name) return t;
    throw std::runtime_error("checkpoint: missing tensor '" + name + "'");
  };
  auto copy_into = [&](const std::string& name, std::vector<float>& dst) {
    const Tensor& src = find(name);
    if (src.numel() != dst.size()) {
      throw std::runtime_error("checkpoint: tensor '" + name + "' has shape " + shape_str(src.shape()) +
                               ", model expects " + std::to_string(dst.size()) + " values");
    }
    dst = src.values();
  };
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    auto& b = blocks_[l];
    const std::string pre = "conv" + std::to_string(l + 1);
    const std::string bn = "bn" + std::to_string(l + 1);
    copy_into(pre + ".weight", b.weight.values());
    copy_into(bn + ".gamma", b.gamma.values());
    copy_into(bn + ".beta", b.beta.values());
    copy_into(bn + ".running_mean", b.stats.running_mean);
    copy_into(bn + ".running_var", b.stats.running_var);
  }
  copy_into("fc1.weight", fc1_w.values());
  copy_into("fc1.bias", fc1_b.values());
  copy_into("fc2.weight", fc2_w.values());
  copy_into("fc2.bias", fc2_b.values());
  copy_into("input.mean", normalization.mean);
  copy_into("input.std", normalization.stddev);
}

DeskCnn DeskCnn::clone() const {
  DeskCnn c = *this;
  for (auto& b : c.blocks_) {
    b.weight = b.weight.clone();
    b.gamma = b.gamma.clone();
    b.beta = b.beta.clone();
  }
  c.fc1_w = fc1_w.clone();
  c.fc1_b = fc1_b.clone();
  c.fc2_w = fc2_w.clone();
  c.fc2_b = fc2_b.clone();
  return c;
}

void DeskCnn::quantize_weights(int bits) {
  auto snap = [bits](Tensor& w) {
    const auto q = weight_quantizer(w.data(), bits);
    for (auto& v : w.data()) v = q.apply(v);
  };
  for (auto& b : blocks_) snap(b.weight);
  snap(fc1_w);
  snap(fc2_w);
}

std::size_t DeskCnn::activation_values() const {
  std::size_t n = 0;
  for (const auto& d : dims_) n += d.values();
  return n;
}

std::vector<float> logits_of(const DeskCnn& model, const DatasetSplit& data,
                             std::span<const std::size_t> indices, const ForwardOptions& options,
                             std::size_t batch_size) {
  NoGradGuard guard;
  std::vector<float> out;
  out.reserve(indices.size() * static_cast<std::size_t>(model.num_classes()));
  for (std::size_t start = 0; start < indices.size(); start += batch_size) {
    const auto chunk = indices.subspan(start, std::min(batch_size, indices.size() - start));
    const Tensor logits = model.forward(make_batch(data, chunk, model.normalization), options);
    out.insert(out.end(), logits.values().begin(), logits.values().end());
  }
  return out;
}

std::vector<int> predict(const DeskCnn& model, const DatasetSplit& data,
                         std::span<const std::size_t> indices, const ForwardOptions& options,
                         std::size_t batch_size) {
  const auto logits = logits_of(model, data, indices, options, batch_size);
  const auto k = static_cast<std::size_t>(model.num_classes());
  std::vector<int> pred(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto first = logits.begin() + static_cast<std::ptrdiff_t>(i * k);
    pred[i] = static_cast<int>(std::max_element(first, first + static_cast<std::ptrdiff_t>(k)) - first);
  }
  return pred;
}

double agreement(std::span<const int> predictions, std::span<const int> reference) {
  if (predictions.size() != reference.size() || predictions.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hit += predictions[i] == reference[i];
  return 100.0 * static_cast<double>(hit) / static_cast<double>(predictions.size());
}

}  // namespace acomp
