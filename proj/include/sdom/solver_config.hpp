#pragma once

#include <cstdint>

namespace sdom {

struct SolverConfig {
    // Particle swarm warm start.
    int swarm_size = 64;
    int pso_iterations = 200;
    double pso_inertia = 0.7;
    double pso_cognitive = 1.5;
    double pso_social = 1.5;
    double penalty_weight = 1e4;
    /// Consecutive infeasible incumbents before the penalty weight doubles.
    int penalty_patience = 10;

    // Barrier Newton refinement.
    int newton_max_iter = 100;  // per barrier level
    double newton_tol = 1e-10;  // first-order KKT residual
    double barrier_start = 1e-2;
    double barrier_end = 1e-10;
    double barrier_factor = 10.0;
    /// Cost per unit of the elastic slack that relaxes every dominance constraint.
    double elastic_weight = 1e4;

    // Constraint generation.
    double constraint_tol = 1e-8;
    int max_generated_constraints = 50;

    std::uint64_t rng_seed = 42;

    /// Throws DomainError on non-positive counts or tolerances.
    void validate() const;
};

} // namespace sdom
