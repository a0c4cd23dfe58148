#include "acomp/compressor.hpp"

#include <stdexcept>
#include <string>

#include "acomp/ops.hpp"

namespace acomp {

namespace {

Tensor zeros_like_slice(const Tensor& x, std::size_t channels) {
  return Tensor(Shape{x.dim(0), channels, x.dim(2), x.dim(3)}, 0.0f);
}

}  // namespace

ActivationCompressor::ActivationCompressor(std::vector<ActivationDims> dims, std::size_t groups,
                                           std::vector<int> init_bits, float calib_decay)
    : dims_(std::move(dims)), groups_(groups) {
  if (groups_ < 2) throw std::invalid_argument("compressor: need at least 2 groups");
  validate_bits(init_bits);
  std::vector<std::size_t> channels;
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    transforms_.push_back(TransformCache::identity(l, dims_[l].channels));
    channels.push_back(dims_[l].channels);
    for (std::size_t g = 0; g + 1 < groups_; ++g) {
      modules_.emplace_back(l, g, init_bits);
      trackers_.emplace_back(calib_decay);
    }
  }
  partition_ = unpruned_partition(channels, groups_);
}

ActivationCompressor ActivationCompressor::from_policy(const CompressionPolicy& policy) {
  if (policy.layers.empty()) throw std::invalid_argument("compressor: empty policy");
  const std::size_t groups = policy.layers.front().groups.groups();
  std::vector<ActivationDims> dims;
  for (const auto& l : policy.layers) {
    if (l.groups.groups() != groups) throw std::invalid_argument("compressor: policy layers disagree on G");
    dims.push_back(l.dims);
  }
  ActivationCompressor c(dims, groups, {8});
  GroupPartition part;
  std::vector<TransformCache> transforms;
  for (std::size_t li = 0; li < policy.layers.size(); ++li) {
    const auto& l = policy.layers[li];
    transforms.push_back(l.transform);
    part.layers.push_back(l.groups);
    for (std::size_t g = 0; g + 1 < groups; ++g) {
      c.module(li, g).bits = {l.bits[g]};
      c.trackers_[li * (groups - 1) + g].set(l.ranges[g]);
    }
  }
  c.set_transforms(std::move(transforms));
  c.set_partition(std::move(part));
  c.mode = CompressMode::hard;
  return c;
}

void ActivationCompressor::set_transforms(std::vector<TransformCache> transforms) {
  if (transforms.size() != dims_.size()) throw std::invalid_argument("compressor: one transform per layer expected");
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    if (transforms[l].dim != dims_[l].channels) {
      throw std::invalid_argument("compressor: transform " + std::to_string(l) + " has the wrong dimension");
    }
  }
  transforms_ = std::move(transforms);
}

void ActivationCompressor::set_partition(GroupPartition partition) {
  if (partition.layers.size() != dims_.size()) throw std::invalid_argument("compressor: one group layout per layer expected");
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    const auto& lg = partition.layers[l];
    if (lg.groups() != groups_ || lg.channels != dims_[l].channels || lg.bounds.back() != lg.channels) {
      throw std::invalid_argument("compressor: group layout " + std::to_string(l) + " does not fit the layer");
    }
  }
  partition_ = std::move(partition);
}

MPModuleState& ActivationCompressor::module(std::size_t layer, std::size_t group) {
  return modules_.at(layer * quantized_groups() + group);
}

const MPModuleState& ActivationCompressor::module(std::size_t layer, std::size_t group) const {
  return modules_.at(layer * quantized_groups() + group);
}

std::vector<Tensor> ActivationCompressor::arch_params() const {
  std::vector<Tensor> out;
  for (const auto& m : modules_) out.push_back(m.beta);
  return out;
}

Calibration ActivationCompressor::range(std::size_t layer, std::size_t group) const {
  return trackers_.at(layer * quantized_groups() + group).range();
}

Tensor ActivationCompressor::operator()(std::size_t layer, const Tensor& activation) {
  if (mode == CompressMode::off) return activation;
  if (layer >= dims_.size()) throw std::out_of_range("compressor: layer " + std::to_string(layer));
  const TransformCache& cache = transforms_[layer];
  const LayerGroups& lg = partition_.layers[layer];
  if (mode == CompressMode::dr_only) return prune_trailing(activation, cache, lg.pruned());

  const Tensor transformed = apply_transform(activation, cache);
  std::vector<Tensor> parts;
  for (std::size_t g = 0; g + 1 < groups_; ++g) {
    if (lg.group_size(g) == 0) continue;
    const Tensor slice = channel_slice(transformed, lg.bounds[g], lg.bounds[g + 1]);
    RangeTracker& tracker = trackers_[layer * quantized_groups() + g];
    if (track_ranges || !tracker.initialized()) tracker.observe(slice.data());
    try {
      parts.push_back(mix_forward(slice, module(layer, g), tracker.range(),
                                  mode == CompressMode::soft ? MixMode::soft : MixMode::hard));
    } catch (const std::exception& e) {
      throw std::runtime_error("layer " + std::to_string(layer) + " group " + std::to_string(g + 1) +
                               ": " + e.what());
    }
  }
  if (lg.pruned() > 0) parts.push_back(zeros_like_slice(transformed, lg.pruned()));
  return invert_transform(channel_concat(parts), cache);
}

ActivationHook ActivationCompressor::hook() {
  return [this](std::size_t layer, const Tensor& a) { return (*this)(layer, a); };
}

std::vector<GroupFootprint> ActivationCompressor::footprints() const {
  std::vector<GroupFootprint> out;
  for (std::size_t l = 0; l < dims_.size(); ++l)
    for (std::size_t g = 0; g + 1 < groups_; ++g)
      out.push_back({&module(l, g), partition_.layers[l].group_size(g), dims_[l].plane()});
  return out;
}

std::size_t ActivationCompressor::total_values() const {
  std::size_t n = 0;
  for (const auto& d : dims_) n += d.values();
  return n;
}

double ActivationCompressor::expected_avg_bits() const {
  double stored = 0.0;
  for (const auto& f : footprints())
    stored += static_cast<double>(expected_bits(*f.state)) * static_cast<double>(f.channels * f.plane);
  return stored / static_cast<double>(total_values());
}

bool ActivationCompressor::concentrated(double threshold) const {
  for (const auto& m : modules_) {
    const auto pi = m.mixing_weights();
    if (pi[m.argmax_branch()] <= threshold) return false;
  }
  return true;
}

CompressionPolicy ActivationCompressor::freeze(int b_min, std::uint64_t seed,
                                               std::uint64_t config_hash) const {
  CompressionPolicy p;
  p.b_min = b_min;
  p.seed = seed;
  p.config_hash = config_hash;
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    PolicyLayer pl;
    pl.dims = dims_[l];
    pl.transform = transforms_[l];
    pl.groups = partition_.layers[l];
    for (std::size_t g = 0; g + 1 < groups_; ++g) {
      pl.bits.push_back(module(l, g).chosen_bits());
      pl.ranges.push_back(range(l, g));
    }
    p.layers.push_back(std::move(pl));
  }
  p.avg_bits = p.recompute_avg_bits();
  return p;
}

Tensor prune_trailing(const Tensor& activation, const TransformCache& cache, std::size_t pruned) {
  if (pruned == 0) return activation;
  if (pruned >= cache.dim) throw std::invalid_argument("prune_trailing: cannot prune every channel");
  const Tensor transformed = apply_transform(activation, cache);
  const std::size_t keep = cache.dim - pruned;
  Tensor kept = channel_slice(transformed, 0, keep);
  return invert_transform(channel_concat({kept, zeros_like_slice(transformed, pruned)}), cache);
}

}  // namespace acomp
