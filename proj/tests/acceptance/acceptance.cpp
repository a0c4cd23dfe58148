#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance/gradient_suite.hpp"
#include "acomp/checkpoint.hpp"
#include "acomp/compressor.hpp"
#include "acomp/losses.hpp"
#include "acomp/partition.hpp"
#include "acomp/pipeline.hpp"
#include "acomp/policy.hpp"
#include "acomp/quantization.hpp"
#include "acomp/search.hpp"
#include "acomp/transform.hpp"

using namespace acomp;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kQuantizerSeconds = 5.0;
constexpr std::size_t kGradInstances = 20;
constexpr double kGradTolerance = 1e-3;
constexpr double kGradSeconds = 60.0;
constexpr double kOrthoTolerance = 1e-5;
constexpr double kRoundTripTolerance = 1e-4;
constexpr double kTruncationTolerance = 0.05;
constexpr double kPcaSeconds = 30.0;
constexpr int kGreedySeeds = 50;
constexpr double kGreedySeconds = 30.0;
constexpr int kSearchStreams = 10000;
constexpr double kSearchSeconds = 10.0;
constexpr double kLossTolerance = 1e-5;
constexpr double kLossSeconds = 1.0;
constexpr double kDeskBits = 4.0;
constexpr double kDeskDrop = 2.0;
constexpr double kDeskSeconds = 30.0 * 60.0;
constexpr double kMatchBits = 0.25;
constexpr double kConcentration = 0.99;
constexpr double kSoftHardGap = 0.5;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- quantizer

float nearest_level(float x, int bits, Calibration r) {
  const std::size_t n = std::size_t{1} << bits;
  const double c = std::clamp(static_cast<double>(x), static_cast<double>(r.lo), static_cast<double>(r.hi));
  double best = 0.0, best_d = 1e300;
  for (std::size_t k = 0; k < n; ++k) {
    const double level = r.lo + static_cast<double>(k) * (static_cast<double>(r.hi) - r.lo) / static_cast<double>(n - 1);
    const double d = std::fabs(c - level);
    if (d <= best_d) {
      best_d = d;
      best = level;
    }
  }
  return static_cast<float>(best);
}

void quantizer_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::size_t mismatches = 0, not_idempotent = 0, not_monotone = 0, total = 0;
  for (int b = 1; b <= 8; ++b) {
    std::uniform_real_distribution<float> lo_d(-3.0f, 0.5f), width_d(0.1f, 6.0f);
    const float lo = lo_d(rng);
    const Calibration r{lo, lo + width_d(rng)};
    const UniformQuantizer q{b, r};
    std::uniform_real_distribution<float> u(r.lo - 1.0f, r.hi + 1.0f);
    std::vector<float> xs(10000);
    for (auto& x : xs) x = u(rng);
    // Include every level and every midpoint between neighbours.
    for (std::size_t k = 0; k < q.levels() && k < xs.size() / 4; ++k) {
      xs[2 * k] = q.level(k);
      if (k + 1 < q.levels()) xs[2 * k + 1] = static_cast<float>(0.5 * (static_cast<double>(q.level(k)) + q.level(k + 1)));
    }
    std::vector<float> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ys[i] = q.apply(xs[i]);
      if (ys[i] != nearest_level(xs[i], b, r)) ++mismatches;
      if (q.apply(ys[i]) != ys[i]) ++not_idempotent;
    }
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return xs[a] < xs[c]; });
    for (std::size_t i = 1; i < order.size(); ++i)
      if (ys[order[i]] < ys[order[i - 1]]) ++not_monotone;
    total += xs.size();
  }
  const double secs = since(t0);
  report("quantizer oracle", mismatches == 0 && not_idempotent == 0 && not_monotone == 0 && secs < kQuantizerSeconds,
         fmt("%zu values, %zu lookup mismatches, %zu idempotence, %zu monotonicity violations, %.2fs (limit %.0fs)",
             total, mismatches, not_idempotent, not_monotone, secs, kQuantizerSeconds));
}

// ---------------------------------------------------------------- gradients

void gradient_suite() {
  const auto t0 = Clock::now();
  const auto r = testing::run_gradient_suite(kGradInstances, 2024);
  const double secs = since(t0);
  report("gradient suite", r.worst < kGradTolerance && secs < kGradSeconds,
         fmt("%zu ops x %zu instances (%zu checks), worst relative error %.3g (%s), tolerance %.0e, %.2fs (limit %.0fs)",
             testing::gradient_cases().size(), kGradInstances, r.instances, r.worst, r.worst_case.c_str(), kGradTolerance, secs,
             kGradSeconds));
}

// ---------------------------------------------------------------- PCA

void pca_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g(0.0f, 1.0f);
  double worst_ortho = 0.0, worst_round = 0.0, worst_trunc = 0.0;
  bool descending = true;
  int cases = 0;
  for (std::size_t d : {8, 12, 16, 24, 32}) {
    for (int rep = 0; rep < 3; ++rep, ++cases) {
      const std::size_t n = 16, h = 4, w = 4, plane = h * w;
      std::vector<float> mix(d * d);
      for (auto& m : mix) m = g(rng);
      std::vector<float> offset(d);
      for (auto& o : offset) o = g(rng);
      Tensor x({n, d, h, w});
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < plane; ++p) {
          std::vector<float> z(d);
          for (std::size_t k = 0; k < d; ++k) z[k] = g(rng) / std::sqrt(1.0f + static_cast<float>(k));
          for (std::size_t c = 0; c < d; ++c) {
            float v = offset[c];
            for (std::size_t k = 0; k < d; ++k) v += mix[c * d + k] * z[k];
            x.values()[(i * d + c) * plane + p] = v;
          }
        }
      const auto cache = fit_pca(x);

      double fro = 0.0;
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) {
          double dot = 0.0;
          for (std::size_t r = 0; r < d; ++r) dot += static_cast<double>(cache.basis[r * d + a]) * cache.basis[r * d + b];
          const double e = dot - (a == b ? 1.0 : 0.0);
          fro += e * e;
        }
      worst_ortho = std::max(worst_ortho, std::sqrt(fro));
      for (std::size_t k = 1; k < d; ++k)
        if (cache.eigenvalues[k] > cache.eigenvalues[k - 1]) descending = false;

      const auto back = invert_transform(apply_transform(x, cache), cache);
      for (std::size_t i = 0; i < x.numel(); ++i)
        worst_round = std::max(worst_round, static_cast<double>(std::fabs(back[i] - x[i])));

      for (std::size_t drop : {std::size_t{1}, d / 4, d / 2}) {
        const auto y = prune_trailing(x, cache, drop);
        double err = 0.0;
        for (std::size_t i = 0; i < x.numel(); ++i) err += static_cast<double>(y[i] - x[i]) * (y[i] - x[i]);
        err /= static_cast<double>(n * plane);
        double energy = 0.0;
        for (std::size_t k = d - drop; k < d; ++k) energy += cache.eigenvalues[k];
        worst_trunc = std::max(worst_trunc, std::fabs(err - energy) / energy);
      }
    }
  }
  const double secs = since(t0);
  report("PCA suite",
         worst_ortho < kOrthoTolerance && descending && worst_round < kRoundTripTolerance &&
             worst_trunc <= kTruncationTolerance && secs < kPcaSeconds,
         fmt("%d cases (8-32 channels): ||U^T U - I||_F max %.2e (< %.0e), descending %s, round trip %.2e (< %.0e), "
             "truncation vs trailing energy %.2f%% (<= %.0f%%), %.1fs",
             cases, worst_ortho, kOrthoTolerance, descending ? "yes" : "no", worst_round, kRoundTripTolerance,
             100.0 * worst_trunc, 100.0 * kTruncationTolerance, secs));
}

// ---------------------------------------------------------------- greedy selection

std::vector<std::pair<std::size_t, std::size_t>> greedy_oracle(const std::vector<LayerSpectrum>& spectra) {
  std::vector<std::size_t> remaining;
  std::size_t budget = 0;
  for (const auto& s : spectra) {
    remaining.push_back(s.sigma.size());
    budget += s.sigma.size() - 1;
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t step = 0; step < budget; ++step) {
    std::size_t best = spectra.size();
    double best_metric = 0.0;
    for (std::size_t l = 0; l < spectra.size(); ++l) {
      if (remaining[l] < 2) continue;
      double total = 0.0;
      for (std::size_t c = 0; c < remaining[l]; ++c) total += spectra[l].sigma[c];
      const double drop = total > 0.0 ? spectra[l].sigma[remaining[l] - 1] / total : 0.0;
      const double m = drop / static_cast<double>(spectra[l].spatial);
      if (best == spectra.size() || m < best_metric) {
        best = l;
        best_metric = m;
      }
    }
    --remaining[best];
    out.emplace_back(best, remaining[best]);
  }
  return out;
}

void greedy_selection() {
  const auto t0 = Clock::now();
  int mismatched = 0;
  std::size_t removals = 0;
  for (int seed = 1; seed <= kGreedySeeds; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> u(0.0, 4.0);
    const std::size_t spatial_choices[] = {1, 4, 16, 64, 256};
    std::vector<LayerSpectrum> spectra(1 + rng() % 5);
    for (auto& s : spectra) {
      s.sigma.resize(1 + rng() % 6);
      // A quarter of the seeds use a coarse grid so exact ties occur.
      for (auto& v : s.sigma) v = seed % 4 == 0 ? std::floor(u(rng)) : u(rng);
      std::sort(s.sigma.rbegin(), s.sigma.rend());
      s.spatial = spatial_choices[rng() % 5];
    }
    SelectionState st(spectra);
    greedy_rank(st, st.removable());
    const auto ref = greedy_oracle(spectra);
    bool same = st.log.size() == ref.size();
    for (std::size_t i = 0; same && i < ref.size(); ++i)
      same = st.log[i].layer == ref[i].first && st.log[i].channel == ref[i].second;
    if (!same) ++mismatched;
    removals += ref.size();
  }
  const double secs = since(t0);
  report("greedy selection oracle", mismatched == 0 && secs < kGreedySeconds,
         fmt("%d seeds (<= 5 layers x <= 6 channels), %zu removals, %d mismatching sequences, %.2fs", kGreedySeeds,
             removals, mismatched, secs));
}

// ---------------------------------------------------------------- search

struct SearchModel {
  std::vector<int> bits{6, 7, 8};
  std::vector<float> beta{0, 0, 0};
  int counter = 0;
  bool frozen = false;
  int patience = 3, b_min = 2;

  bool observe() {
    if (frozen) return false;
    if (beta[0] > beta[1] && beta[1] > beta[2]) ++counter;
    else counter = 0;
    if (counter < patience) return false;
    counter = 0;
    bits = {bits[0] - 1, bits[0], bits[1]};
    beta = {beta[1], beta[0], beta[1]};
    frozen = bits[0] <= b_min;
    return true;
  }
};

void dynamic_search() {
  const auto t0 = Clock::now();
  std::vector<std::string> problems;

  {
    MPModuleState m(0, 0, {6, 7, 8});
    SearchState s(m, {3, 2});
    const std::vector<std::vector<int>> chain{{5, 6, 7}, {4, 5, 6}, {3, 4, 5}, {2, 3, 4}};
    std::size_t link = 0, step = 0;
    for (; step < 40 && !s.frozen; ++step) {
      m.beta.values() = {3.0f, 2.0f, 1.0f};
      if (auto ev = observe(s, m, step)) {
        if (step % 3 != 2) problems.push_back(fmt("shift at step %zu", step));
        if (link >= chain.size() || ev->new_bits != chain[link]) problems.push_back("chain bits");
        if (m.beta.values() != std::vector<float>{2.0f, 3.0f, 2.0f}) problems.push_back("chain beta");
        ++link;
      }
    }
    if (link != 4 || !s.frozen) problems.push_back("chain did not freeze at (2,3,4)");
    m.beta.values() = {3.0f, 2.0f, 1.0f};
    for (int i = 0; i < 10; ++i)
      if (observe(s, m)) problems.push_back("frozen group shifted");
    if (shift_down(s, m).applied) problems.push_back("frozen shift applied");
  }
  {
    MPModuleState m(0, 0, {6, 7, 8});
    SearchState s(m, {3, 2});
    const std::vector<std::vector<float>> seq{{3, 2, 1}, {3, 2, 1}, {1, 3, 2}, {3, 2, 1}, {3, 2, 1}, {3, 2, 1}};
    for (std::size_t i = 0; i < seq.size(); ++i) {
      m.beta.values() = seq[i];
      if (observe(s, m, i).has_value() != (i == 5)) problems.push_back(fmt("patience reset at %zu", i));
    }
  }
  {
    MPModuleState m(0, 0, {5, 6, 7});
    SearchState s(m, {});
    m.beta.values() = {5, 4, 3};
    shift_down(s, m);
    if (m.bits != std::vector<int>{4, 5, 6} || m.beta.values() != std::vector<float>{4, 5, 4})
      problems.push_back("single shift");
  }

  std::mt19937_64 rng(77);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::size_t observations = 0, model_mismatch = 0, property = 0, shifts = 0;
  for (int stream = 0; stream < kSearchStreams; ++stream) {
    SearchModel ref;
    ref.patience = 1 + static_cast<int>(rng() % 4);
    ref.b_min = 1 + static_cast<int>(rng() % 4);
    MPModuleState m(0, 0, ref.bits);
    SearchState s(m, {ref.patience, ref.b_min});
    const float drift = 0.5f * g(rng);
    int last = m.bits[0];
    for (int i = 0; i < 60; ++i) {
      const std::vector<float> beta{g(rng) + 2 * drift, g(rng) + drift, g(rng)};
      m.beta.values() = beta;
      ref.beta = beta;
      const bool fired = observe(s, m).has_value();
      const bool ref_fired = ref.observe();
      shifts += fired;
      ++observations;
      if (fired != ref_fired || m.bits != ref.bits || m.beta.values() != ref.beta) ++model_mismatch;
      if (m.bits[0] > last || m.bits[0] < ref.b_min) ++property;
      last = m.bits[0];
    }
  }
  const double secs = since(t0);
  std::string first = problems.empty() ? "none" : problems.front();
  report("dynamic search exactness",
         problems.empty() && model_mismatch == 0 && property == 0 && secs < kSearchSeconds,
         fmt("scripted failures %zu (first: %s); %d random streams, %zu observations, %zu shifts, %zu mismatches vs "
             "reference model, %zu b1 violations, %.2fs",
             problems.size(), first.c_str(), kSearchStreams, observations, shifts, model_mismatch, property, secs));
}

// ---------------------------------------------------------------- memory loss

void memory_loss_values() {
  const auto t0 = Clock::now();
  MPModuleState m(0, 0, {6, 7, 8});
  m.beta.values() = {std::log(0.5f), std::log(0.3f), std::log(0.2f)};
  const std::vector<GroupFootprint> one{{&m, 2, 16}};
  const double hand = memory_loss(one, {1.0f, 1.0f}).item();
  const double hand_err = std::fabs(hand - 214.4) / 214.4;

  MPModuleState a(0, 0, {2, 3, 4}), b(0, 1, {5, 6, 7});
  a.beta.values() = {0.0f, 200.0f, 0.0f};
  b.beta.values() = {0.0f, 0.0f, 200.0f};
  const std::vector<GroupFootprint> hot{{&a, 3, 64}, {&b, 5, 64}};
  const double exact = 0.5 / 512.0 * (3.0 * 3 * 64 + 7.0 * 5 * 64);
  const double hot_err = std::fabs(memory_loss(hot, {0.5f, 512.0f}).item() - exact) / exact;

  PolicyLayer l;
  l.dims = {4, 2, 2};
  l.transform = TransformCache::identity(0, 4);
  l.groups.channels = 4;
  l.groups.bounds = {0, 2, 4};
  l.bits = {4};
  l.ranges = {Calibration{}};
  const double avg = average_bits({l});
  const double secs = since(t0);
  report("memory-loss hand values",
         hand_err < kLossTolerance && hot_err < kLossTolerance && avg == 2.0 && secs < kLossSeconds,
         fmt("214.4 example %.6f (rel err %.1e), one-hot identity rel err %.1e (tolerance %.0e), avg bits %.6f "
             "(expected 2 exactly), %.3fs",
             hand, hand_err, hot_err, kLossTolerance, avg, secs));
}

// ---------------------------------------------------------------- desk runs

struct Desk {
  fs::path dir;
  DatasetSplit train = make_synthetic_dataset(5000, 11, true);
  DatasetSplit eval = make_synthetic_dataset(1000, 12, false);
};

struct Baseline {
  DeskCnn model{0};
  double a0 = 0.0;
  double seconds = 0.0;
};

Baseline baseline_for(Desk& desk, const RunConfig& cfg, bool fresh) {
  Baseline b;
  const auto ck = desk.dir / fmt("baseline_seed%llu_e%d.ckpt", static_cast<unsigned long long>(cfg.seed),
                                 cfg.baseline_epochs);
  const auto t0 = Clock::now();
  if (!fresh && fs::exists(ck)) {
    b.model = DeskCnn(cfg.seed);
    b.model.load(load_checkpoint(ck));
  } else {
    b.model = train_baseline(cfg, desk.train, desk.eval).model;
    save_checkpoint(ck, b.model.state());
  }
  b.a0 = accuracy_with(b.model, desk.eval, cfg, nullptr);
  b.seconds = since(t0);
  return b;
}

struct RunOutcome {
  std::string label;
  double p = 0.0;
  int groups = 0;
  double bits = 0.0;
  double hard = 0.0;
  double soft = 0.0;
  double min_max_pi = 0.0;
  double seconds = 0.0;
  bool monotone = true;
};

std::vector<RunOutcome> all_runs;

bool trajectories_non_increasing(const CompressResult& r) {
  std::map<std::pair<std::size_t, std::size_t>, std::vector<int>> last;
  for (const auto& t : r.trajectory) {
    auto& prev = last[{t.layer, t.group}];
    if (!prev.empty())
      for (std::size_t i = 0; i < t.bits.size(); ++i)
        if (t.bits[i] > prev[i]) return false;
    prev = t.bits;
  }
  return true;
}

RunOutcome run_compress(const std::string& label, const RunConfig& cfg, const Baseline& base, Desk& desk) {
  const auto t0 = Clock::now();
  const auto r = compress(cfg, base.model, desk.train, desk.eval);
  RunOutcome o{label, cfg.p, cfg.groups, r.policy.avg_bits, r.hard_accuracy, r.soft_accuracy, r.min_max_pi,
               since(t0), trajectories_non_increasing(r)};
  std::ofstream(desk.dir / (label + "_epochs.csv")) << epochs_csv(r);
  std::ofstream(desk.dir / (label + "_trajectory.csv")) << trajectory_csv(r);
  std::ofstream(desk.dir / (label + "_final_bits.csv")) << final_bits_csv(r.policy);
  save_policy(desk.dir / (label + "_policy.bin"), r.policy);
  std::printf("  run %s: p %.4g G %d bits %.3f hard %.2f soft %.2f min max-pi %.4f %.0fs\n", label.c_str(), cfg.p,
              cfg.groups, o.bits, o.hard, o.soft, o.min_max_pi, o.seconds);
  std::fflush(stdout);
  all_runs.push_back(o);
  return o;
}

void desk_end_to_end(Desk& desk) {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.seed = 1;
  const auto base = baseline_for(desk, cfg, true);
  std::printf("  baseline seed 1: A0 %.2f, %.0fs\n", base.a0, base.seconds);
  // Ascending p; the first policy at or under the bit budget is kept. Accuracy
  // plays no part in the choice.
  std::optional<RunOutcome> chosen;
  for (double p : {0.03, 0.05, 0.1, 0.2}) {
    cfg.p = p;
    const auto o = run_compress(fmt("desk_p%g", p), cfg, base, desk);
    if (o.bits <= kDeskBits) {
      chosen = o;
      break;
    }
  }
  const double secs = since(t0);
  if (!chosen) {
    report("desk end-to-end", false, fmt("no p in [0.03, 0.2] reached %.1f bits, A0 %.2f", kDeskBits, base.a0));
    return;
  }
  const bool ok = chosen->hard >= base.a0 - kDeskDrop && chosen->monotone && secs < kDeskSeconds;
  report("desk end-to-end", ok,
         fmt("A0 %.2f, p %.3g, avg bits %.3f (<= %.1f), hard accuracy %.2f (>= A0 - %.1f), trajectories "
             "non-increasing %s, %.1f min including baseline and p tuning (limit %.0f min)",
             base.a0, chosen->p, chosen->bits, kDeskBits, chosen->hard, kDeskDrop, chosen->monotone ? "yes" : "no",
             secs / 60.0, kDeskSeconds / 60.0));
}

// Shorter fine-tuning, applied to both G values alike.
RunConfig trend_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.epochs = 6;
  cfg.settle_epochs = 2;
  cfg.finetune_samples = 3000;
  cfg.p = 0.05;
  return cfg;
}

void g_trend(Desk& desk) {
  const auto t0 = Clock::now();
  int holds = 0, matched = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto cfg = trend_config(seed);
    const auto base = baseline_for(desk, cfg, false);
    cfg.groups = 3;
    const auto g3 = run_compress(fmt("trend_s%llu_G3", static_cast<unsigned long long>(seed)), cfg, base, desk);

    // Bisection on log p until the G=2 policy lands within the bit window.
    cfg.groups = 2;
    double lo = 0.0, hi = 0.0, p = cfg.p;
    std::optional<RunOutcome> g2;
    for (int it = 0; it < 7; ++it) {
      cfg.p = p;
      const auto o = run_compress(fmt("trend_s%llu_G2_%d", static_cast<unsigned long long>(seed), it), cfg, base, desk);
      if (std::fabs(o.bits - g3.bits) <= kMatchBits) {
        g2 = o;
        break;
      }
      if (o.bits > g3.bits) lo = p;
      else hi = p;
      if (hi == 0.0) p = lo * 2.0;
      else if (lo == 0.0) p = hi / 2.0;
      else p = std::sqrt(lo * hi);
    }
    if (g2) {
      ++matched;
      if (g3.hard >= g2->hard) ++holds;
      detail += fmt("seed %llu: G3 %.2f@%.2fb vs G2 %.2f@%.2fb; ", static_cast<unsigned long long>(seed), g3.hard,
                    g3.bits, g2->hard, g2->bits);
    } else {
      detail += fmt("seed %llu: no G2 match for %.2f bits; ", static_cast<unsigned long long>(seed), g3.bits);
    }
  }
  report("G-trend", holds >= 2,
         fmt("%d/3 seeds with G=3 >= G=2 at matched bits (+-%.2f), %d matched; %s%.0f min", holds, kMatchBits, matched,
             detail.c_str(), since(t0) / 60.0));
}

void soft_hard_consistency() {
  std::size_t concentrated = 0, violations = 0;
  double worst = 0.0;
  for (const auto& r : all_runs) {
    if (r.min_max_pi <= kConcentration) continue;
    ++concentrated;
    const double gap = std::fabs(r.hard - r.soft);
    worst = std::max(worst, gap);
    if (gap > kSoftHardGap) ++violations;
  }
  report("soft/hard consistency", concentrated > 0 && concentrated == all_runs.size() && violations == 0,
         fmt("%zu/%zu runs ended with every max-pi > %.2f, worst |hard - soft| %.2f points (limit %.1f)", concentrated,
             all_runs.size(), kConcentration, worst, kSoftHardGap));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string work_dir = "acceptance_runs";
  bool quick = false;
  app.add_option("--work-dir", work_dir, "scratch directory for training runs");
  app.add_flag("--quick", quick, "skip the training-based checks");
  CLI11_PARSE(app, argc, argv);

  quantizer_oracle();
  gradient_suite();
  pca_suite();
  greedy_selection();
  dynamic_search();
  memory_loss_values();
  if (!quick) {
    Desk desk;
    desk.dir = work_dir;
    fs::create_directories(desk.dir);
    desk_end_to_end(desk);
    g_trend(desk);
    soft_hard_consistency();
  }
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
