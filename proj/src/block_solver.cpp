#include "block_solver.hpp"

#include <algorithm>
#include <cmath>

namespace riskprobe::detail {

namespace {

std::size_t block_begin(std::size_t b, std::size_t blocks, std::size_t horizon) { return b * horizon / blocks; }

struct Candidate {
  std::vector<double> blocks;
  PlanEval eval;
};

}  // namespace

std::vector<double> expand_blocks(std::span<const double> blocks, std::size_t horizon) {
  if (blocks.empty() || blocks.size() > horizon) {
    throw InvalidInput("expand_blocks: block count must lie in [1, horizon]");
  }
  std::vector<double> accels(horizon);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto first = block_begin(b, blocks.size(), horizon);
    const auto last = block_begin(b + 1, blocks.size(), horizon);
    std::fill(accels.begin() + static_cast<std::ptrdiff_t>(first), accels.begin() + static_cast<std::ptrdiff_t>(last),
              blocks[b]);
  }
  return accels;
}

std::vector<double> blocks_of(std::span<const double> accels, std::size_t blocks) {
  std::vector<double> out(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto first = block_begin(b, blocks, accels.size());
    const auto last = block_begin(b + 1, blocks, accels.size());
    double sum = 0.0;
    for (auto t = first; t < last; ++t) sum += accels[t];
    out[b] = last > first ? sum / static_cast<double>(last - first) : 0.0;
  }
  return out;
}

BlockSolveResult minimize_blocks(const PlanObjective& objective, const PlannerConfig& cfg,
                                 const std::vector<double>* warm_accels, double cap) {
  const auto& sc = cfg.solver;
  const double lo = cfg.u_min.accel;
  const double hi = cfg.u_max.accel;
  const std::size_t nb = sc.blocks;

  BlockSolveResult result;
  std::vector<Candidate> seen;
  const auto evaluate = [&](const std::vector<double>& blocks) -> const PlanEval& {
    ++result.evaluations;
    seen.push_back({blocks, objective(expand_blocks(blocks, cfg.horizon))});
    return seen.back().eval;
  };

  std::vector<std::vector<double>> starts;
  for (std::size_t c = 0; c < sc.init_candidates; ++c) {
    const double a = sc.init_candidates == 1
                         ? 0.5 * (lo + hi)
                         : lo + (hi - lo) * static_cast<double>(c) / static_cast<double>(sc.init_candidates - 1);
    starts.emplace_back(nb, a);
  }
  if (lo <= 0.0 && hi >= 0.0) {
    starts.emplace_back(nb, 0.0);
  }
  if (warm_accels != nullptr && warm_accels->size() == cfg.horizon) {
    auto warm = blocks_of(*warm_accels, nb);
    for (double& a : warm) a = std::clamp(a, lo, hi);
    starts.push_back(std::move(warm));
  }

  std::size_t best = 0;
  for (const auto& s : starts) {
    evaluate(s);
    if (seen.back().eval.objective < seen[best].eval.objective) best = seen.size() - 1;
  }
  result.best_initial_objective = seen[best].eval.objective;

  std::vector<double> current = seen[best].blocks;
  double current_obj = seen[best].eval.objective;
  double step = sc.step_size;
  std::vector<double> grad(nb);
  for (std::size_t it = 0; it < sc.iterations; ++it) {
    ++result.iterations;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      auto plus = current;
      auto minus = current;
      plus[j] = std::min(hi, current[j] + sc.fd_step);
      minus[j] = std::max(lo, current[j] - sc.fd_step);
      const double width = plus[j] - minus[j];
      if (width <= 0.0) {
        grad[j] = 0.0;
        continue;
      }
      const double f_plus = evaluate(plus).objective;
      const double f_minus = evaluate(minus).objective;
      grad[j] = (f_plus - f_minus) / width;
      norm2 += grad[j] * grad[j];
    }
    const double norm = std::sqrt(norm2);
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    auto trial = current;
    for (std::size_t j = 0; j < nb; ++j) {
      trial[j] = std::clamp(current[j] - step * grad[j] / norm, lo, hi);
    }
    const double trial_obj = evaluate(trial).objective;
    if (trial_obj < current_obj) {
      current = std::move(trial);
      current_obj = trial_obj;
      step = std::min(step * 1.5, hi - lo);
    } else {
      step *= 0.5;
    }
  }

  std::size_t chosen = 0;
  std::size_t min_constraint = 0;
  bool any_feasible = false;
  for (std::size_t n = 0; n < seen.size(); ++n) {
    if (seen[n].eval.objective < seen[chosen].eval.objective) chosen = n;
    if (seen[n].eval.constraint < seen[min_constraint].eval.constraint) min_constraint = n;
    any_feasible = any_feasible || seen[n].eval.constraint <= cap;
  }
  if (!any_feasible) {
    chosen = min_constraint;
    result.infeasible = true;
  }
  result.blocks = seen[chosen].blocks;
  result.eval = seen[chosen].eval;
  return result;
}

}  // namespace riskprobe::detail
