#include "acomp/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace acomp {

LayerSpectrum LayerSpectrum::from_eigenvalues(std::span<const float> eigenvalues,
                                              std::size_t spatial) {
  LayerSpectrum s;
  s.spatial = spatial;
  s.sigma.reserve(eigenvalues.size());
  for (float e : eigenvalues) s.sigma.push_back(std::sqrt(std::max(0.0, static_cast<double>(e))));
  return s;
}

double selection_metric(std::span<const double> sigma, std::size_t remaining, std::size_t spatial) {
  if (remaining == 0 || remaining > sigma.size()) {
    throw std::invalid_argument("selection_metric: remaining dimension " +
                                std::to_string(remaining) + " outside [1, " +
                                std::to_string(sigma.size()) + "]");
  }
  if (spatial == 0) throw std::invalid_argument("selection_metric: zero spatial size");
  double total = 0.0;
  for (std::size_t c = 0; c < remaining; ++c) total += sigma[c];
  if (total <= 0.0) return 0.0;
  const double accuracy_drop = sigma[remaining - 1] / total;
  return accuracy_drop / static_cast<double>(spatial);
}

SelectionState::SelectionState(std::vector<LayerSpectrum> spectra) {
  for (auto& s : spectra) {
    if (s.sigma.empty()) throw std::invalid_argument("selection: layer with no channels");
    LayerSelection l;
    l.remaining = s.sigma.size();
    l.metric = selection_metric(s.sigma, l.remaining, s.spatial);
    l.spectrum = std::move(s);
    layers.push_back(std::move(l));
  }
}

std::size_t SelectionState::total_channels() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.spectrum.sigma.size();
  return n;
}

std::size_t SelectionState::removable() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.remaining - 1;
  return n;
}

void greedy_rank(SelectionState& state, std::size_t budget) {
  if (budget > state.removable()) {
    throw std::invalid_argument("greedy_rank: budget " + std::to_string(budget) + " exceeds the " +
                                std::to_string(state.removable()) + " removable channels");
  }
  for (std::size_t step = 0; step < budget; ++step) {
    std::size_t best = state.layers.size();
    for (std::size_t l = 0; l < state.layers.size(); ++l) {
      if (state.layers[l].remaining <= 1) continue;
      if (best == state.layers.size() || state.layers[l].metric < state.layers[best].metric) best = l;
    }
    LayerSelection& layer = state.layers[best];
    state.log.push_back({best, layer.remaining - 1, layer.metric});
    --layer.remaining;
    layer.metric = selection_metric(layer.spectrum.sigma, layer.remaining, layer.spectrum.spatial);
  }
}

SelectionState greedy_rank(std::vector<LayerSpectrum> spectra, std::size_t budget) {
  SelectionState state(std::move(spectra));
  greedy_rank(state, budget);
  return state;
}

GroupPartition build_partition(SelectionState state, std::span<const double> thresholds) {
  const std::size_t groups = thresholds.size() + 1;
  if (groups < 2) throw std::invalid_argument("build_partition: need at least 2 groups");
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    if (thresholds[k] < 0.0 || thresholds[k] > 1.0 || (k > 0 && thresholds[k] <= thresholds[k - 1])) {
      throw std::invalid_argument("build_partition: thresholds must ascend within [0, 1]");
    }
  }
  greedy_rank(state, state.removable());

  const std::size_t total = state.total_channels();
  const std::size_t logged = state.log.size();
  std::vector<std::size_t> cuts;
  for (double t : thresholds) {
    const auto c = static_cast<std::size_t>(std::floor(t * static_cast<double>(total) + 1e-9));
    cuts.push_back(std::min(c, logged));
  }

  // counts[l][g]: channels of layer l in group g (0-based, last = pruned).
  std::vector<std::vector<std::size_t>> counts(state.layers.size(), std::vector<std::size_t>(groups, 0));
  std::size_t begin = 0;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const std::size_t group = groups - 1 - k;
    for (std::size_t e = begin; e < cuts[k]; ++e) ++counts[state.log[e].layer][group];
    begin = std::max(begin, cuts[k]);
  }

  GroupPartition partition;
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    LayerGroups lg;
    lg.channels = state.layers[l].spectrum.sigma.size();
    std::size_t assigned = 0;
    for (std::size_t g = 1; g < groups; ++g) assigned += counts[l][g];
    counts[l][0] = lg.channels - assigned;
    lg.bounds.push_back(0);
    for (std::size_t g = 0; g < groups; ++g) lg.bounds.push_back(lg.bounds.back() + counts[l][g]);
    partition.layers.push_back(std::move(lg));
  }
  return partition;
}

std::vector<double> default_thresholds(std::size_t groups, double pruned_fraction) {
  if (groups < 2) throw std::invalid_argument("default_thresholds: need at least 2 groups");
  pruned_fraction = std::clamp(pruned_fraction, 0.0, 1.0);
  std::vector<double> t{pruned_fraction};
  const double step = (1.0 - pruned_fraction) / static_cast<double>(groups - 1);
  for (std::size_t k = 1; k + 1 < groups; ++k) t.push_back(pruned_fraction + step * static_cast<double>(k));
  return t;
}

GroupPartition unpruned_partition(std::span<const std::size_t> channels, std::size_t groups) {
  if (groups < 2) throw std::invalid_argument("unpruned_partition: need at least 2 groups");
  GroupPartition p;
  for (auto d : channels) {
    LayerGroups lg;
    lg.channels = d;
    lg.bounds.assign(groups + 1, d);
    lg.bounds[0] = 0;
    p.layers.push_back(std::move(lg));
  }
  return p;
}

}  // namespace acomp
