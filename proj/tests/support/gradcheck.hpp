#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "acomp/tensor.hpp"

namespace acomp::testing {

struct GradReport {
  double max_rel = 0.0;
  std::size_t checked = 0;
};

// Central differences of sum(w * f(x)) for a fixed random weighting w, compared
// with the analytic gradient. The step is applied in float, so the numeric
// derivative divides by the step actually taken. The relative error per coordinate uses
// max(|analytic|, |numeric|, floor) as the scale.
inline GradReport grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                             std::vector<Tensor> inputs, std::uint64_t seed, double step = 1e-3,
                             double floor = 1e-2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(-1.0f, 1.0f);
  for (auto& t : inputs) t.set_requires_grad(true);
  const Tensor probe = f(inputs);
  std::vector<float> w(probe.numel());
  for (auto& v : w) v = unit(rng);
  auto evaluate = [&](const std::vector<Tensor>& in) {
    NoGradGuard guard;
    return f(in).values();
  };
  for (auto& t : inputs) t.zero_grad();
  f(inputs).backward(w);
  GradReport rep;
  for (auto& t : inputs) {
    std::vector<float> analytic(t.numel(), 0.0f);
    if (t.has_grad()) analytic.assign(t.grad().begin(), t.grad().end());
    for (std::size_t i = 0; i < t.numel(); ++i) {
      const float orig = t.data()[i];
      const float hi = static_cast<float>(orig + step), lo = static_cast<float>(orig - step);
      t.data()[i] = hi;
      const auto up = evaluate(inputs);
      t.data()[i] = lo;
      const auto down = evaluate(inputs);
      t.data()[i] = orig;
      // Outputs the coordinate does not touch cancel exactly.
      double diff = 0.0;
      for (std::size_t o = 0; o < w.size(); ++o)
        diff += static_cast<double>(w[o]) * (static_cast<double>(up[o]) - static_cast<double>(down[o]));
      const double numeric = diff / (static_cast<double>(hi) - static_cast<double>(lo));
      const double a = analytic[i];
      const double scale = std::max({std::fabs(a), std::fabs(numeric), floor});
      rep.max_rel = std::max(rep.max_rel, std::fabs(a - numeric) / scale);
      ++rep.checked;
    }
  }
  return rep;
}

// One random direction over all inputs, checked with a fourth-order central
// difference of F = sum(w * f): (8 (F(x+d) - F(x-d)) - (F(x+2d) - F(x-2d))) / 6
// against 2 <grad, d>. Inputs are snapped to a 2^-10 grid and displacements to
// a 2^-20 grid, so every probed point is exact in float (for |x| < 8) and the
// displacement the analytic side sees is the one the function sees. Outputs
// are summed in double. The error is relative to sum |2 g_i d_i|, the size of
// the terms the directional derivative adds up, so an instance whose terms
// happen to cancel is not judged on the leftover.
inline double directional_check(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                                std::vector<Tensor> inputs, std::uint64_t seed, double step) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto snap = [](double v, double grid) { return std::round(v / grid) * grid; };
  std::vector<std::vector<double>> disp;
  for (auto& t : inputs) {
    t = t.detach().clone();
    for (auto& v : t.values()) v = static_cast<float>(snap(std::clamp(static_cast<double>(v), -7.0, 7.0), 0x1p-10));
    t.set_requires_grad(true);
    std::vector<double> d(t.numel());
    for (auto& x : d) x = snap(step * unit(rng), 0x1p-20);
    disp.push_back(std::move(d));
  }
  const Tensor probe = f(inputs);
  std::vector<double> w(probe.numel());
  for (auto& v : w) v = unit(rng);
  std::vector<float> wf(w.begin(), w.end());
  for (auto& v : w) v = static_cast<double>(static_cast<float>(v));
  f(inputs).backward(wf);
  double analytic = 0.0, magnitude = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!inputs[k].has_grad()) continue;
    const auto g = inputs[k].grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      analytic += 2.0 * static_cast<double>(g[i]) * disp[k][i];
      magnitude += std::fabs(2.0 * static_cast<double>(g[i]) * disp[k][i]);
    }
  }
  auto objective = [&](double m) {
    std::vector<Tensor> moved;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      Tensor c = inputs[k].detach().clone();
      for (std::size_t i = 0; i < c.numel(); ++i)
        c.data()[i] = static_cast<float>(static_cast<double>(inputs[k][i]) + m * disp[k][i]);
      moved.push_back(c);
    }
    NoGradGuard guard;
    const auto out = f(moved).values();
    double acc = 0.0;
    for (std::size_t o = 0; o < out.size(); ++o) acc += w[o] * out[o];
    return acc;
  };
  const double numeric = (8.0 * (objective(1) - objective(-1)) - (objective(2) - objective(-2))) / 6.0;
  const double scale = std::max({magnitude, std::fabs(numeric), 1e-30});
  return std::fabs(analytic - numeric) / scale;
}

}  // namespace acomp::testing
