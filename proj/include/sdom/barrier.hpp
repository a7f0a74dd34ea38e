#pragma once

#include "sdom/solver_config.hpp"
#include "sdom/types.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace sdom {

enum class Objective { max_return, min_risk };

/// Portfolio problem restricted to a finite threshold set T:
///
///   optimize  objective(x[, q])
///   s.t.      LPM(x'xi, t, p-1) <= LPM(benchmark, t, p-1)  for t in T
///             mean(x'xi) >= mean(benchmark),  sum x = 1,  x >= 0
///
/// Each lower partial moment is lifted with one shortfall variable per
/// scenario, s_j >= (t - x'xi_j)_+, so all constraints are smooth. A single
/// elastic slack relaxes every dominance row and is charged
/// SolverConfig::elastic_weight per unit, which keeps the barrier interior
/// nonempty even when the benchmark is the only feasible portfolio.
struct RefineProblem {
    const ScenarioSet& scenarios;
    const DiscreteRandomVariable& benchmark;
    DominanceOrder order;
    Objective objective = Objective::max_return;
    RiskSpec risk{};
};

/// Iterate of the primal-dual barrier method.
struct BarrierPoint {
    Eigen::VectorXd x;
    double q = 0.0;  // only meaningful when the objective carries q
    double elastic = 0.0;
    Eigen::VectorXd excess;                   // (L_j - q)_+ lift, min-risk only
    std::vector<Eigen::VectorXd> shortfall;   // one per threshold
    std::vector<Eigen::VectorXd> moment;      // r_j >= s_j^(p-1), one per threshold
    double mu = 0.0;
    /// Multipliers of the barrier arguments; empty for a purely primal iterate.
    Eigen::VectorXd dual;
};

struct NewtonResult {
    PortfolioWeights weights;
    std::optional<double> q;
    BarrierPoint point;
    /// First-order residual at the final barrier level (see barrier_kkt_residual).
    double kkt_residual = 0.0;
    bool converged = false;
    int iterations = 0;
    int barrier_levels = 0;
    /// Largest relative diagonal shift needed to factor the reduced system.
    double max_regularization = 0.0;
};

/// True when the objective of `problem` carries the auxiliary variable q
/// (min-risk with beta > 0).
[[nodiscard]] bool has_risk_parameter(const RefineProblem& problem);

/// Primal-dual Newton on the log-barrier problem, barrier weight decreasing
/// by cfg.barrier_factor down to cfg.barrier_end. Starts from `start` pulled
/// slightly into the simplex interior, at a weight no smaller than
/// cfg.barrier_start. Each level runs until the residual drops below a tenth
/// of its weight; the last level uses cfg.newton_tol.
/// Throws DomainError if the order is below 2 or T is empty.
[[nodiscard]] NewtonResult newton_refine(const RefineProblem& problem, const PortfolioWeights& start,
                                         std::span<const double> thresholds, const SolverConfig& cfg);

/// Continues from a previous iterate at its barrier weight.
[[nodiscard]] NewtonResult newton_refine(const RefineProblem& problem, const BarrierPoint& warm,
                                         std::span<const double> thresholds, const SolverConfig& cfg);

/// Max of the Lagrangian gradient (projected on sum dx = 0, divided by
/// max(1, mean multiplier / 100)) and |lambda_i g_i - mu| at barrier weight
/// point.mu. Multipliers default to mu / g when `point` has none.
/// Infinite when `point` is not strictly interior.
[[nodiscard]] double barrier_kkt_residual(const RefineProblem& problem, std::span<const double> thresholds,
                                          const BarrierPoint& point, const SolverConfig& cfg);

} // namespace sdom
