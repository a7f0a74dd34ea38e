#include "sdom/pso.hpp"

#include "sdom/errors.hpp"
#include "sdom/simplex.hpp"

#include <fmt/core.h>

#include <cmath>
#include <random>
#include <vector>

namespace sdom {

void SolverConfig::validate() const {
    if (swarm_size < 1) throw DomainError(fmt::format("swarm_size must be >= 1, got {}", swarm_size));
    if (pso_iterations < 0) throw DomainError(fmt::format("pso_iterations must be >= 0, got {}", pso_iterations));
    if (newton_max_iter < 1) throw DomainError(fmt::format("newton_max_iter must be >= 1, got {}", newton_max_iter));
    if (max_generated_constraints < 1) {
        throw DomainError(fmt::format("max_generated_constraints must be >= 1, got {}", max_generated_constraints));
    }
    if (penalty_patience < 1) throw DomainError("penalty_patience must be >= 1");
    if (!(newton_tol > 0.0) || !(constraint_tol > 0.0)) throw DomainError("solver tolerances must be positive");
    if (!(penalty_weight > 0.0) || !(elastic_weight > 0.0)) throw DomainError("penalty weights must be positive");
    if (!(barrier_start > 0.0) || !(barrier_end > 0.0) || barrier_end > barrier_start || !(barrier_factor > 1.0)) {
        throw DomainError("barrier schedule must satisfy 0 < end <= start and factor > 1");
    }
}

namespace {

// Portable uniform draw in [0, 1): 53 high bits of the engine output.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> best_position;
    double best_objective = 0.0;
    double best_penalty = 0.0;
};

} // namespace

PsoResult pso_search(std::size_t d, const WeightsEvaluator& objective, const WeightsEvaluator& penalty,
                     const SolverConfig& cfg) {
    cfg.validate();
    if (d == 0) throw DimensionError("particle swarm needs at least one asset");

    std::mt19937_64 rng(cfg.rng_seed);
    double mu = cfg.penalty_weight;
    const auto fitness = [&mu](double obj, double pen) { return obj + mu * pen; };

    std::vector<Particle> swarm(static_cast<std::size_t>(cfg.swarm_size));
    for (std::size_t k = 0; k < swarm.size(); ++k) {
        std::vector<double> start(d, 1.0 / static_cast<double>(d));
        if (k > 0) {
            for (double& w : start) w = -std::log1p(-uniform01(rng));
        }
        Particle& p = swarm[k];
        p.position = simplex_projection(start);
        p.velocity.assign(d, 0.0);
        p.best_position = p.position;
        p.best_objective = objective(p.position);
        p.best_penalty = penalty(p.position);
    }

    std::size_t leader = 0;
    const auto elect_leader = [&] {
        leader = 0;
        for (std::size_t k = 1; k < swarm.size(); ++k) {
            if (fitness(swarm[k].best_objective, swarm[k].best_penalty) <
                fitness(swarm[leader].best_objective, swarm[leader].best_penalty)) {
                leader = k;
            }
        }
    };
    elect_leader();

    int infeasible_streak = 0;
    for (int it = 0; it < cfg.pso_iterations; ++it) {
        const std::vector<double> global_best = swarm[leader].best_position;
        for (Particle& p : swarm) {
            for (std::size_t i = 0; i < d; ++i) {
                const double r1 = uniform01(rng);
                const double r2 = uniform01(rng);
                p.velocity[i] = cfg.pso_inertia * p.velocity[i] +
                                cfg.pso_cognitive * r1 * (p.best_position[i] - p.position[i]) +
                                cfg.pso_social * r2 * (global_best[i] - p.position[i]);
                p.position[i] += p.velocity[i];
            }
            p.position = simplex_projection(p.position);
            const double obj = objective(p.position);
            const double pen = penalty(p.position);
            if (fitness(obj, pen) < fitness(p.best_objective, p.best_penalty)) {
                p.best_position = p.position;
                p.best_objective = obj;
                p.best_penalty = pen;
            }
        }
        elect_leader();

        if (swarm[leader].best_penalty > 0.0) {
            if (++infeasible_streak >= cfg.penalty_patience) {
                mu *= 2.0;
                infeasible_streak = 0;
                elect_leader();
            }
        } else {
            infeasible_streak = 0;
        }
    }

    const Particle& best = swarm[leader];
    return {PortfolioWeights(best.best_position), best.best_objective, best.best_penalty, mu, cfg.pso_iterations};
}

} // namespace sdom
