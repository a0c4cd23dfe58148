#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "acomp/quantization.hpp"

namespace acomp {

enum class PatienceMode { consecutive, cumulative };

struct SearchConfig {
  int patience = 3;
  int b_min = 2;
  PatienceMode mode = PatienceMode::consecutive;
};

struct ShiftEvent {
  std::size_t step = 0;
  std::size_t layer = 0;
  std::size_t group = 0;
  std::vector<int> old_bits;
  std::vector<int> new_bits;
  bool applied = true;  // false: requested on a frozen group, nothing changed
};

/// Downward bit-width search for one three-branch MP module.
///
/// Each observation checks beta_1 > beta_2 > beta_3. When the tendency has
/// been seen `patience` times the branch set slides down by one bit and beta
/// is reshaped into a bell around the middle branch. A group whose lowest
/// branch reaches b_min freezes.
struct SearchState {
  int patience_counter = 0;
  SearchConfig config;
  bool frozen = false;

  SearchState() = default;
  // Throws unless `mp` has exactly three branches.
  SearchState(const MPModuleState& mp, SearchConfig cfg);
};

// Updates the counter from mp.beta and fires shift_down when it reaches the
// patience limit. Returns the shift if one happened.
std::optional<ShiftEvent> observe(SearchState& state, MPModuleState& mp, std::size_t step = 0);

// bits (b1, b2, b3) <- (b1 - 1, b1, b2); beta (x1, x2, x3) <- (x2, x1, x2).
// On a frozen group this is a no-op reported with applied = false.
ShiftEvent shift_down(SearchState& state, MPModuleState& mp, std::size_t step = 0);

}  // namespace acomp
