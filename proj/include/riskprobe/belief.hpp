#pragma once

#include "riskprobe/common.hpp"
#include "riskprobe/gaussmath.hpp"

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskprobe {

/// One motion mode (intent i, mode k). `observation` is the likelihood model
/// over the observation feature vector; `steer` is the target in the planner's
/// interaction-feature space (absent for belief-only use).
struct ModeTarget {
  std::size_t intent = 0;
  std::size_t mode = 0;
  Gaussian observation;
  std::optional<Gaussian> steer;
  std::string label;
};

/// Validated, immutable collection of mode targets grouped by intent.
/// Modes are stored flat in (intent, mode) order; `flat_index` maps (i, k).
class ModeSet {
 public:
  explicit ModeSet(std::vector<ModeTarget> targets, std::vector<std::string> intent_names = {});

  std::size_t intent_count() const { return offsets_.size() - 1; }
  std::size_t mode_count(std::size_t intent) const { return offsets_.at(intent + 1) - offsets_.at(intent); }
  std::size_t total_modes() const { return targets_.size(); }
  std::size_t flat_index(std::size_t intent, std::size_t mode) const;
  Eigen::Index observation_dim() const { return targets_.front().observation.dim(); }

  const ModeTarget& at(std::size_t intent, std::size_t mode) const { return targets_[flat_index(intent, mode)]; }
  const ModeTarget& flat(std::size_t index) const { return targets_.at(index); }
  const std::vector<ModeTarget>& targets() const { return targets_; }
  const std::vector<std::string>& intent_names() const { return intent_names_; }

  /// ln I + sum_i ln K_i, the entropy of the uniform belief.
  double max_entropy() const;

 private:
  std::vector<ModeTarget> targets_;
  std::vector<std::size_t> offsets_;
  std::vector<std::string> intent_names_;
};

using ModeSetPtr = std::shared_ptr<const ModeSet>;

/// Intent probabilities pi and per-intent mode weights w (stored flat, aligned
/// with the ModeSet's flat order). Immutable; update() returns a new value.
class HierarchicalBelief {
 public:
  HierarchicalBelief(ModeSetPtr modes, std::vector<double> intent_probs, std::vector<double> mode_weights);

  const ModeSet& modes() const { return *modes_; }
  const ModeSetPtr& mode_set() const { return modes_; }
  std::span<const double> intent_probs() const { return pi_; }
  std::span<const double> mode_weights(std::size_t intent) const;
  const std::vector<double>& flat_mode_weights() const { return w_; }
  double intent_prob(std::size_t i) const { return pi_.at(i); }
  double mode_weight(std::size_t i, std::size_t k) const { return w_.at(modes_->flat_index(i, k)); }

 private:
  ModeSetPtr modes_;
  std::vector<double> pi_;
  std::vector<double> w_;
};

/// Raised by update() when the evidence normalizer Z falls below 1e-300.
class DegenerateEvidence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EntropyForm {
  Literal,         ///< -sum pi log pi - sum_i sum_k w log w
  IntentWeighted,  ///< mode term weighted by pi_i (Shannon entropy of the joint)
};

HierarchicalBelief uniform_belief(ModeSetPtr modes);

/// p(z | i, k) as a density value (not log).
double mode_likelihood(const Vec& z, const ModeTarget& target);

/// L[i] = sum_k w_{i,k} l_{i,k}.
double intent_likelihood(std::span<const double> weights_row, std::span<const double> likelihoods_row);

/// Hierarchical Bayes update of (pi, w) given observation z. Throws
/// DegenerateEvidence when every mode is astronomically unlikely.
HierarchicalBelief update(const HierarchicalBelief& b, const Vec& z);

struct UpdateOutcome {
  HierarchicalBelief belief;
  bool degenerate = false;
};

/// update() with the degenerate-evidence fallback: keeps the prior and flags.
UpdateOutcome update_or_hold(const HierarchicalBelief& b, const Vec& z);

/// omega_{i,k} = pi_i * w_{i,k}, flat in ModeSet order.
std::vector<double> joint_weights(const HierarchicalBelief& b);

double entropy(const HierarchicalBelief& b, EntropyForm form = EntropyForm::Literal);

}  // namespace riskprobe
