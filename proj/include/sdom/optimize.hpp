#pragma once

#include "sdom/barrier.hpp"
#include "sdom/solver_config.hpp"
#include "sdom/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdom {

struct PhaseIterations {
    int pso = 0;
    int newton = 0;
    int barrier_levels = 0;
    int constraint_rounds = 0;
    int generated_constraints = 0;
};

/// Outcome of a portfolio driver. When `infeasible` is set the weights and
/// every portfolio-dependent value are absent and `message` explains why.
struct SolveReport {
    Objective objective_kind = Objective::max_return;
    double order = 0.0;
    std::optional<PortfolioWeights> weights;
    /// Worst-case threshold of the final verification first, then the
    /// thresholds whose constraint is binding at the solution.
    std::vector<double> active_thresholds;
    std::optional<double> q_star;
    std::optional<double> objective_value;
    std::optional<double> expected_return;
    double benchmark_return = 0.0;
    std::optional<double> risk_value;
    double simplex_residual = 0.0;
    /// max(0, worst gap) of a fresh verification of the returned weights (for
    /// infeasible runs: of the least-violating iterate).
    double dominance_residual = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
    bool infeasible = false;
    std::string message;
    PhaseIterations iterations;
    /// Final threshold set handed to the Newton phase.
    std::vector<double> thresholds;
    std::uint64_t seed = 0;
    /// Newton's value of the inner risk parameter (min-risk only); q_star is
    /// the risk module's smallest minimizer on the final portfolio.
    std::optional<double> newton_q;
};

/// Maximize expected return subject to dominance of `benchmark` at order p >= 2.
[[nodiscard]] SolveReport optimize_max_return(const ScenarioSet& s, const DiscreteRandomVariable& benchmark,
                                              DominanceOrder p, const SolverConfig& cfg = {});

/// Minimize the higher-order risk functional jointly over weights and q
/// subject to dominance of `benchmark` at order p >= 2.
[[nodiscard]] SolveReport optimize_min_risk(const ScenarioSet& s, const DiscreteRandomVariable& benchmark,
                                            DominanceOrder p, const RiskSpec& spec, const SolverConfig& cfg = {});

} // namespace sdom
