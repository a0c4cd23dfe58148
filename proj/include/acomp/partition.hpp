#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace acomp {

// What the greedy ranking needs to know about one compressed layer.
struct LayerSpectrum {
  std::vector<double> sigma;  // descending importance
  std::size_t spatial = 1;    // w_l * h_l, the storage freed per removed channel

  // sigma = sqrt(eigenvalue), the quantity the eigenvalue-ratio proxy uses.
  static LayerSpectrum from_eigenvalues(std::span<const float> eigenvalues, std::size_t spatial);
};

// Accuracy-drop proxy per unit of saved storage for removing the trailing
// surviving channel: (sigma[d'-1] / sum(sigma[0..d'))) / spatial. A layer
// whose surviving spectrum sums to zero costs nothing.
double selection_metric(std::span<const double> sigma, std::size_t remaining, std::size_t spatial);

struct Removal {
  std::size_t layer = 0;
  std::size_t channel = 0;  // index in importance order
  double metric = 0.0;      // S_l at the time of removal

  bool operator==(const Removal& o) const { return layer == o.layer && channel == o.channel; }
};

struct LayerSelection {
  LayerSpectrum spectrum;
  std::size_t remaining = 0;  // d'_l
  double metric = 0.0;        // S_l for the current d'_l
};

struct SelectionState {
  std::vector<LayerSelection> layers;
  std::vector<Removal> log;  // earliest = least important

  explicit SelectionState(std::vector<LayerSpectrum> spectra);
  std::size_t total_channels() const;
  // Channels still removable without taking any layer below one survivor.
  std::size_t removable() const;
};

// Removes `budget` more channels, each time the trailing channel of the layer
// with the smallest S_l (ties: lowest layer index).
void greedy_rank(SelectionState& state, std::size_t budget);
SelectionState greedy_rank(std::vector<LayerSpectrum> spectra, std::size_t budget);

// Per-layer group layout in importance order. Group g (0-based) owns channels
// [bounds[g], bounds[g+1]); the last group is pruned.
struct LayerGroups {
  std::size_t channels = 0;
  std::vector<std::size_t> bounds;  // size G + 1, bounds.front() == 0, bounds.back() == channels

  std::size_t groups() const { return bounds.size() - 1; }
  std::size_t group_size(std::size_t g) const { return bounds[g + 1] - bounds[g]; }
  std::size_t pruned() const { return group_size(groups() - 1); }
};

struct GroupPartition {
  std::vector<LayerGroups> layers;

  std::size_t groups() const { return layers.empty() ? 0 : layers.front().groups(); }
};

// Completes the ranking, then cuts the removal log at floor(t_k * total
// channels) for each threshold. The first cut feeds the pruned group, each
// following slice the next more important group; channels never logged or
// logged after the last cut land in group 1. Needs G - 1 ascending thresholds
// in [0, 1] (G >= 2).
GroupPartition build_partition(SelectionState state, std::span<const double> thresholds);

// Thresholds that give the pruned group `pruned_fraction` of all channels and
// split the rest evenly across the G - 1 quantized groups.
std::vector<double> default_thresholds(std::size_t groups, double pruned_fraction);

// A partition with `groups` groups where only group 1 is populated.
GroupPartition unpruned_partition(std::span<const std::size_t> channels, std::size_t groups);

}  // namespace acomp
