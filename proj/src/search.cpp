#include "acomp/search.hpp"

#include <stdexcept>
#include <string>

namespace acomp {

SearchState::SearchState(const MPModuleState& mp, SearchConfig cfg) : config(cfg) {
  if (mp.branches() != 3) {
    throw std::invalid_argument("search: dynamic bit-width search needs 3 branches, got " +
                                std::to_string(mp.branches()));
  }
  if (cfg.patience < 1) throw std::invalid_argument("search: patience must be >= 1");
  if (cfg.b_min < 1) throw std::invalid_argument("search: b_min must be >= 1");
  frozen = mp.bits.front() <= cfg.b_min;
}

std::optional<ShiftEvent> observe(SearchState& state, MPModuleState& mp, std::size_t step) {
  if (state.frozen) return std::nullopt;
  const auto beta = mp.beta.data();
  const bool descending = beta[0] > beta[1] && beta[1] > beta[2];
  if (descending) {
    ++state.patience_counter;
  } else if (state.config.mode == PatienceMode::consecutive) {
    state.patience_counter = 0;
  }
  if (state.patience_counter < state.config.patience) return std::nullopt;
  state.patience_counter = 0;
  return shift_down(state, mp, step);
}

ShiftEvent shift_down(SearchState& state, MPModuleState& mp, std::size_t step) {
  ShiftEvent ev;
  ev.step = step;
  ev.layer = mp.layer_id;
  ev.group = mp.group_id;
  ev.old_bits = mp.bits;
  if (state.frozen) {
    ev.new_bits = mp.bits;
    ev.applied = false;
    return ev;
  }
  const std::vector<int> b = mp.bits;
  mp.bits = {b[0] - 1, b[0], b[1]};
  auto beta = mp.beta.data();
  const float x1 = beta[0], x2 = beta[1];
  beta[0] = x2;
  beta[1] = x1;
  beta[2] = x2;
  if (mp.bits.front() <= state.config.b_min) state.frozen = true;
  ev.new_bits = mp.bits;
  return ev;
}

}  // namespace acomp
