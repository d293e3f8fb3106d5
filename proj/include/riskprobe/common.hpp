#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace riskprobe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Random stream type used everywhere. Callers own their streams; nothing
/// in the library draws from a global generator.
using Rng = std::mt19937_64;

/// Thrown when an operation receives inputs that violate its preconditions
/// (dimension mismatch, out-of-range parameter, non-finite value).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mixes a base seed with up to two stream identifiers (splitmix64 finalizer).
/// Used to derive independent per-run / per-mode / per-step streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

inline Rng make_rng(std::uint64_t base, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(base, a, b));
}

double standard_normal(Rng& rng);
double uniform01(Rng& rng);

}  // namespace riskprobe
