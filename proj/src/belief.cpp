#include "riskprobe/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace riskprobe {

namespace {

constexpr double kNormTolerance = 1e-9;
const double kLogEvidenceFloor = std::log(1e-300);

void check_distribution(std::span<const double> p, const char* what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidInput(std::string("HierarchicalBelief: ") + what + " entry outside [0,1]");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormTolerance) {
    throw InvalidInput(std::string("HierarchicalBelief: ") + what + " does not sum to 1 (sum " +
                       std::to_string(sum) + ")");
  }
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

ModeSet::ModeSet(std::vector<ModeTarget> targets, std::vector<std::string> intent_names)
    : targets_(std::move(targets)), intent_names_(std::move(intent_names)) {
  if (targets_.empty()) {
    throw InvalidInput("ModeSet: empty target set");
  }
  std::stable_sort(targets_.begin(), targets_.end(), [](const ModeTarget& a, const ModeTarget& b) {
    return a.intent != b.intent ? a.intent < b.intent : a.mode < b.mode;
  });
  const auto obs_dim = targets_.front().observation.dim();
  const auto steer_dim = targets_.front().steer ? targets_.front().steer->dim() : Eigen::Index{0};
  offsets_.push_back(0);
  std::size_t expected_intent = 0;
  std::size_t expected_mode = 0;
  for (std::size_t n = 0; n < targets_.size(); ++n) {
    const auto& t = targets_[n];
    if (t.observation.dim() != obs_dim) {
      throw InvalidInput("ModeSet: inconsistent observation dimension across modes");
    }
    if ((t.steer ? t.steer->dim() : Eigen::Index{0}) != steer_dim) {
      throw InvalidInput("ModeSet: inconsistent steering-target dimension across modes");
    }
    if (t.intent == expected_intent + 1 && expected_mode > 0) {
      offsets_.push_back(n);
      ++expected_intent;
      expected_mode = 0;
    }
    if (t.intent != expected_intent || t.mode != expected_mode) {
      throw InvalidInput("ModeSet: (intent, mode) ids must be unique and contiguous from 0; got (" +
                         std::to_string(t.intent) + ", " + std::to_string(t.mode) + ")");
    }
    ++expected_mode;
  }
  offsets_.push_back(targets_.size());
  if (intent_names_.empty()) {
    for (std::size_t i = 0; i < intent_count(); ++i) {
      intent_names_.push_back("intent" + std::to_string(i));
    }
  }
  if (intent_names_.size() != intent_count()) {
    throw InvalidInput("ModeSet: intent name count does not match intent count");
  }
}

std::size_t ModeSet::flat_index(std::size_t intent, std::size_t mode) const {
  if (intent >= intent_count() || mode >= mode_count(intent)) {
    throw InvalidInput("ModeSet: (intent, mode) index out of range");
  }
  return offsets_[intent] + mode;
}

double ModeSet::max_entropy() const {
  double h = std::log(static_cast<double>(intent_count()));
  for (std::size_t i = 0; i < intent_count(); ++i) {
    h += std::log(static_cast<double>(mode_count(i)));
  }
  return h;
}

HierarchicalBelief::HierarchicalBelief(ModeSetPtr modes, std::vector<double> intent_probs,
                                       std::vector<double> flat_weights)
    : modes_(std::move(modes)), pi_(std::move(intent_probs)), w_(std::move(flat_weights)) {
  if (!modes_) {
    throw InvalidInput("HierarchicalBelief: null mode set");
  }
  if (pi_.size() != modes_->intent_count()) {
    throw InvalidInput("HierarchicalBelief: intent probability length does not match intent count");
  }
  if (w_.size() != modes_->total_modes()) {
    throw InvalidInput("HierarchicalBelief: mode weight length does not match mode count");
  }
  check_distribution(pi_, "intent probabilities");
  for (std::size_t i = 0; i < pi_.size(); ++i) {
    check_distribution(mode_weights(i), "mode weight row");
  }
}

std::span<const double> HierarchicalBelief::mode_weights(std::size_t intent) const {
  const auto first = modes_->flat_index(intent, 0);
  return {w_.data() + first, modes_->mode_count(intent)};
}

HierarchicalBelief uniform_belief(ModeSetPtr modes) {
  if (!modes) {
    throw InvalidInput("uniform_belief: null mode set");
  }
  const auto I = modes->intent_count();
  std::vector<double> pi(I, 1.0 / static_cast<double>(I));
  std::vector<double> w;
  w.reserve(modes->total_modes());
  for (std::size_t i = 0; i < I; ++i) {
    const auto K = modes->mode_count(i);
    w.insert(w.end(), K, 1.0 / static_cast<double>(K));
  }
  return HierarchicalBelief(std::move(modes), std::move(pi), std::move(w));
}

double mode_likelihood(const Vec& z, const ModeTarget& target) {
  return std::exp(log_density(target.observation, z));
}

double intent_likelihood(std::span<const double> weights_row, std::span<const double> likelihoods_row) {
  if (weights_row.size() != likelihoods_row.size()) {
    throw InvalidInput("intent_likelihood: weight and likelihood rows differ in length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < weights_row.size(); ++k) {
    sum += weights_row[k] * likelihoods_row[k];
  }
  return sum;
}

HierarchicalBelief update(const HierarchicalBelief& b, const Vec& z) {
  const ModeSet& modes = b.modes();
  if (z.size() != modes.observation_dim()) {
    throw InvalidInput("update: observation dimension " + std::to_string(z.size()) +
                       " does not match mode targets (" + std::to_string(modes.observation_dim()) + ")");
  }
  const auto I = modes.intent_count();
  const auto& w = b.flat_mode_weights();
  const auto pi = b.intent_probs();

  std::vector<double> log_l(modes.total_modes());
  for (std::size_t n = 0; n < log_l.size(); ++n) {
    log_l[n] = log_density(modes.flat(n).observation, z);
  }

  // Shift by the max over modes that carry prior mass so the largest term is 1.
  double global_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < I; ++i) {
    if (pi[i] <= 0.0) continue;
    for (std::size_t k = 0; k < modes.mode_count(i); ++k) {
      const auto n = modes.flat_index(i, k);
      if (w[n] > 0.0) global_max = std::max(global_max, log_l[n]);
    }
  }

  std::vector<double> scaled_intent(I, 0.0);
  double evidence = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    double L = 0.0;
    for (std::size_t k = 0; k < modes.mode_count(i); ++k) {
      const auto n = modes.flat_index(i, k);
      L += w[n] * std::exp(log_l[n] - global_max);
    }
    scaled_intent[i] = pi[i] * L;
    evidence += scaled_intent[i];
  }
  if (!(evidence > 0.0) || global_max + std::log(evidence) < kLogEvidenceFloor) {
    throw DegenerateEvidence("update: evidence below 1e-300; observation is implausible under every mode");
  }

  std::vector<double> new_pi(I);
  for (std::size_t i = 0; i < I; ++i) {
    new_pi[i] = scaled_intent[i] / evidence;
  }

  std::vector<double> new_w(w.size());
  for (std::size_t i = 0; i < I; ++i) {
    const auto K = modes.mode_count(i);
    const auto first = modes.flat_index(i, 0);
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      if (w[first + k] > 0.0) row_max = std::max(row_max, log_l[first + k]);
    }
    double row_norm = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      new_w[first + k] = w[first + k] > 0.0 ? w[first + k] * std::exp(log_l[first + k] - row_max) : 0.0;
      row_norm += new_w[first + k];
    }
    for (std::size_t k = 0; k < K; ++k) {
      new_w[first + k] /= row_norm;
    }
  }
  return HierarchicalBelief(b.mode_set(), std::move(new_pi), std::move(new_w));
}

UpdateOutcome update_or_hold(const HierarchicalBelief& b, const Vec& z) {
  try {
    return {update(b, z), false};
  } catch (const DegenerateEvidence&) {
    return {b, true};
  }
}

std::vector<double> joint_weights(const HierarchicalBelief& b) {
  const ModeSet& modes = b.modes();
  std::vector<double> omega(modes.total_modes());
  for (std::size_t i = 0; i < modes.intent_count(); ++i) {
    for (std::size_t k = 0; k < modes.mode_count(i); ++k) {
      const auto n = modes.flat_index(i, k);
      omega[n] = b.intent_probs()[i] * b.flat_mode_weights()[n];
    }
  }
  return omega;
}

double entropy(const HierarchicalBelief& b, EntropyForm form) {
  const ModeSet& modes = b.modes();
  double h = 0.0;
  for (std::size_t i = 0; i < modes.intent_count(); ++i) {
    const double pi_i = b.intent_probs()[i];
    h -= xlogx(pi_i);
    double row = 0.0;
    for (double w : b.mode_weights(i)) {
      row -= xlogx(w);
    }
    h += form == EntropyForm::Literal ? row : pi_i * row;
  }
  return h;
}

}  // namespace riskprobe
