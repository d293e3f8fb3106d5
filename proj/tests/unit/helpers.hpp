#pragma once

#include "riskprobe/belief.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace riskprobe::testing {

/// 1-D mode set with one target per entry of means (grouped by rows).
inline ModeSetPtr scalar_modes(const std::vector<std::vector<double>>& means, double variance = 1.0) {
  std::vector<ModeTarget> targets;
  for (std::size_t i = 0; i < means.size(); ++i) {
    for (std::size_t k = 0; k < means[i].size(); ++k) {
      targets.push_back({i, k, Gaussian::scalar(means[i][k], variance), std::nullopt, ""});
    }
  }
  return std::make_shared<const ModeSet>(std::move(targets));
}

inline ModeSetPtr random_modes(Rng& rng, std::size_t max_intents = 4, std::size_t max_modes = 3) {
  const std::size_t intents = 1 + rng() % max_intents;
  std::vector<ModeTarget> targets;
  for (std::size_t i = 0; i < intents; ++i) {
    const std::size_t modes = 1 + rng() % max_modes;
    for (std::size_t k = 0; k < modes; ++k) {
      const double mean = 6.0 * (uniform01(rng) - 0.5);
      const double sd = 0.3 + 1.5 * uniform01(rng);
      targets.push_back({i, k, Gaussian::scalar(mean, sd * sd), std::nullopt, ""});
    }
  }
  return std::make_shared<const ModeSet>(std::move(targets));
}

/// Random valid belief over a mode set (Dirichlet(1)-like via exponentials).
inline HierarchicalBelief random_belief(const ModeSetPtr& ms, Rng& rng) {
  std::vector<double> pi(ms->intent_count());
  double total = 0.0;
  for (double& p : pi) total += p = -std::log(1.0 - uniform01(rng));
  for (double& p : pi) p /= total;
  std::vector<double> w(ms->total_modes());
  for (std::size_t i = 0; i < ms->intent_count(); ++i) {
    const std::size_t first = ms->flat_index(i, 0);
    double row = 0.0;
    for (std::size_t k = 0; k < ms->mode_count(i); ++k) row += w[first + k] = -std::log(1.0 - uniform01(rng));
    for (std::size_t k = 0; k < ms->mode_count(i); ++k) w[first + k] /= row;
  }
  return HierarchicalBelief(ms, std::move(pi), std::move(w));
}

}  // namespace riskprobe::testing
