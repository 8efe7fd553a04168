#include "pourlab/reward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "pourlab/error.hpp"

namespace pourlab::reward {
namespace {

// Snaps a value to 15 significant decimal digits so that grid entries such as
// 0.2 - 1 * 0.05 equal the decimal literal 0.15 rather than its neighbour.
// The zero offset returns the base untouched.
double offset_weight(double base, double offset, double sigma) {
  if (offset == 0.0) return base;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", base + offset * sigma);
  return std::strtod(buf, nullptr);
}

}  // namespace

void validate(const RewardWeights& w) {
  if (!(std::isfinite(w.w_a) && w.w_a > 0.0)) throw ConfigError("w_a", "must be > 0");
  if (!(std::isfinite(w.w_t) && w.w_t > 0.0)) throw ConfigError("w_t", "must be > 0");
  if (!(std::isfinite(w.w_e) && w.w_e >= 0.0)) throw ConfigError("w_e", "must be >= 0");
}

void validate(const MutationSpec& spec) {
  if (!(std::isfinite(spec.sigma_t) && spec.sigma_t > 0.0)) {
    throw ConfigError("sigma_t", "must be > 0");
  }
  if (!(std::isfinite(spec.sigma_e) && spec.sigma_e > 0.0)) {
    throw ConfigError("sigma_e", "must be > 0");
  }
  const auto& g = spec.grid_offsets;
  if (g.empty()) throw ConfigError("grid_offsets", "must not be empty");
  if (!std::is_sorted(g.begin(), g.end())) throw ConfigError("grid_offsets", "must be ascending");
  if (std::adjacent_find(g.begin(), g.end()) != g.end()) {
    throw ConfigError("grid_offsets", "must not repeat");
  }
  if (std::find(g.begin(), g.end(), 0.0) == g.end()) {
    throw ConfigError("grid_offsets", "must contain 0");
  }
}

double compute_reward(const RewardWeights& w, const RewardInputs& info) {
  if (!std::isfinite(info.accuracy) || !std::isfinite(info.elapsed) ||
      !std::isfinite(info.effort) || !std::isfinite(w.w_a) || !std::isfinite(w.w_t) ||
      !std::isfinite(w.w_e)) {
    throw NumericError("compute_reward: non-finite input");
  }
  return std::exp(-info.elapsed / w.w_t) * (w.w_a * info.accuracy) - w.w_e * info.effort;
}

double mutate_weight(double base, double sigma, WeightKind kind, std::mt19937_64& rng) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) throw ConfigError("sigma", "must be > 0");
  std::normal_distribution<double> noise(0.0, sigma);
  for (;;) {
    const double w = base + noise(rng);
    if (kind == WeightKind::kTime ? w > 0.0 : w >= 0.0) return w;
  }
}

RewardWeights mutate_weights(const RewardWeights& base, const MutationSpec& spec,
                             std::mt19937_64& rng) {
  validate(spec);
  RewardWeights out = base;
  out.w_t = mutate_weight(base.w_t, spec.sigma_t, WeightKind::kTime, rng);
  out.w_e = mutate_weight(base.w_e, spec.sigma_e, WeightKind::kEffort, rng);
  return out;
}

std::vector<RewardWeights> build_weight_grid(const RewardWeights& base, const MutationSpec& spec) {
  validate(base);
  validate(spec);
  std::vector<RewardWeights> grid;
  grid.reserve(spec.grid_offsets.size() * spec.grid_offsets.size());
  for (double kt : spec.grid_offsets) {
    const double w_t = std::max(offset_weight(base.w_t, kt, spec.sigma_t), 0.1 * base.w_t);
    for (double ke : spec.grid_offsets) {
      const double w_e = std::max(offset_weight(base.w_e, ke, spec.sigma_e), 0.0);
      grid.push_back({base.w_a, w_t, w_e});
    }
  }
  return grid;
}

int baseline_cell(const MutationSpec& spec) {
  const auto& g = spec.grid_offsets;
  const int zero = static_cast<int>(std::find(g.begin(), g.end(), 0.0) - g.begin());
  return zero * static_cast<int>(g.size()) + zero;
}

double per_step_reward(const RewardWeights& w, const RewardInputs& previous,
                       const RewardInputs& current) {
  const double gain = w.w_a * (std::exp(-current.elapsed / w.w_t) * current.accuracy -
                               std::exp(-previous.elapsed / w.w_t) * previous.accuracy);
  return gain - w.w_e * current.effort;
}

}  // namespace pourlab::reward
