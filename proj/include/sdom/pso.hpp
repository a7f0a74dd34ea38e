#pragma once

#include "sdom/solver_config.hpp"
#include "sdom/types.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace sdom {

using WeightsEvaluator = std::function<double(std::span<const double>)>;

struct PsoResult {
    PortfolioWeights weights;
    double objective;
    double penalty;
    /// Penalty weight in force when the search stopped.
    double penalty_weight;
    int iterations;
};

/// Particle swarm over the d-simplex minimizing objective + mu * penalty.
///
/// Particle 0 starts at equal weights, the others at Dirichlet(1) draws; every
/// position update is followed by a simplex projection. mu starts at
/// cfg.penalty_weight and doubles whenever the incumbent has been infeasible
/// (penalty > 0) for cfg.penalty_patience consecutive iterations. Runs exactly
/// cfg.pso_iterations updates and is deterministic in cfg.rng_seed.
[[nodiscard]] PsoResult pso_search(std::size_t d, const WeightsEvaluator& objective, const WeightsEvaluator& penalty,
                                   const SolverConfig& cfg);

} // namespace sdom
