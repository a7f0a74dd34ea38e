#include "sdom/optimize.hpp"

#include "sdom/dominance.hpp"
#include "sdom/errors.hpp"
#include "sdom/pso.hpp"
#include "sdom/risk.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdom {

namespace {

constexpr double kActiveTolerance = 1e-6;
constexpr int kElasticEscalations = 2;

// Sum of positive dominance gaps over T plus the mean shortfall, on raw
// scenario returns (no merging needed for moments).
double dominance_penalty(const ScenarioSet& s, const std::vector<double>& pi, double k, const std::vector<double>& T,
                         const std::vector<double>& rhs, double benchmark_mean, std::span<const double> w) {
    const Eigen::VectorXd y = portfolio_returns(s, w);
    double penalty = 0.0;
    double m = 0.0;
    for (Eigen::Index j = 0; j < y.size(); ++j) m += pi[static_cast<std::size_t>(j)] * y[j];
    penalty += std::max(0.0, benchmark_mean - m);
    for (std::size_t tau = 0; tau < T.size(); ++tau) {
        double lpm = 0.0;
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            const double e = T[tau] - y[j];
            if (e > 0.0) lpm += pi[static_cast<std::size_t>(j)] * (k == 1.0 ? e : std::pow(e, k));
        }
        penalty += std::max(0.0, lpm - rhs[tau]);
    }
    return penalty;
}

SolveReport drive(const ScenarioSet& s, const DiscreteRandomVariable& benchmark, DominanceOrder p,
                  Objective objective, const RiskSpec& spec, const SolverConfig& cfg) {
    cfg.validate();
    if (p.value() < 2.0) {
        throw DomainError(fmt::format("portfolio optimization requires stochastic order >= 2, got {}", p.value()));
    }
    if (objective == Objective::min_risk) spec.validate();

    const std::size_t d = s.assets();
    const double k = p.moment();
    const double benchmark_mean = mean(benchmark);
    const Eigen::VectorXd asset_means = s.asset_means();
    const auto& pi = s.scenario_probabilities();

    SolveReport report;
    report.objective_kind = objective;
    report.order = p.value();
    report.benchmark_return = benchmark_mean;
    report.seed = cfg.rng_seed;

    std::vector<double> T(benchmark.outcomes());
    std::vector<double> rhs;
    for (double t : T) rhs.push_back(lower_partial_moment(benchmark, t, k));

    const auto risk_of = [&](std::span<const double> w) {
        return higher_order_risk(portfolio_return_variable(s, PortfolioWeights(std::vector<double>(w.begin(), w.end()), 1e-6)), spec);
    };
    const WeightsEvaluator pso_objective = [&](std::span<const double> w) {
        if (objective == Objective::max_return) {
            double m = 0.0;
            for (std::size_t i = 0; i < d; ++i) m += w[i] * asset_means[static_cast<Eigen::Index>(i)];
            return -m;
        }
        return risk_of(w).rho;
    };
    const WeightsEvaluator pso_penalty = [&](std::span<const double> w) {
        return dominance_penalty(s, pi, k, T, rhs, benchmark_mean, w);
    };

    const PsoResult pso = pso_search(d, pso_objective, pso_penalty, cfg);
    report.iterations.pso = pso.iterations;

    const RefineProblem problem{s, benchmark, p, objective, spec};
    PortfolioWeights start = pso.weights;

    struct Candidate {
        NewtonResult newton;
        DominanceCertificate cert;
        double violation;
    };
    std::optional<Candidate> best;
    std::optional<Candidate> last;

    for (int round = 0;; ++round) {
        ++report.iterations.constraint_rounds;
        SolverConfig round_cfg = cfg;
        NewtonResult newton = newton_refine(problem, start, T, round_cfg);
        report.iterations.newton += newton.iterations;
        report.iterations.barrier_levels += newton.barrier_levels;
        for (int e = 0; e < kElasticEscalations && newton.point.elastic > 1e-2 * cfg.constraint_tol; ++e) {
            round_cfg.elastic_weight *= 100.0;
            newton = newton_refine(problem, start, T, round_cfg);
            report.iterations.newton += newton.iterations;
            report.iterations.barrier_levels += newton.barrier_levels;
        }

        const DiscreteRandomVariable y = portfolio_return_variable(s, newton.weights);
        const DominanceCertificate cert = verify(y, benchmark, p, cfg.constraint_tol);
        last = Candidate{newton, cert, std::max(cert.worst_gap, benchmark_mean - mean(y))};
        if (!best || last->violation < best->violation) best = last;
        if (cert.dominates) break;
        if (report.iterations.generated_constraints >= cfg.max_generated_constraints) break;
        if (!(cert.worst_gap > cfg.constraint_tol)) break;
        const bool known = std::any_of(T.begin(), T.end(), [&](double t) {
            return std::abs(t - cert.worst_t) <= 1e-12 * std::max(1.0, std::abs(t));
        });
        if (known) break;
        T.push_back(cert.worst_t);
        rhs.push_back(lower_partial_moment(benchmark, cert.worst_t, k));
        ++report.iterations.generated_constraints;
        start = newton.weights;
    }

    report.thresholds = T;
    const Candidate& final = last->cert.dominates ? *last : *best;
    report.kkt_residual = final.newton.kkt_residual;
    report.dominance_residual = std::max(0.0, final.cert.worst_gap);
    report.simplex_residual = final.newton.weights.simplex_residual();

    if (!final.cert.dominates) {
        report.infeasible = true;
        report.converged = false;
        report.message = fmt::format(
            "No portfolio allocation satisfies stochastic dominance of order {} against the benchmark "
            "(least violation found: gap {:.6g} at t = {:.6g}, {} constraints generated)",
            p.value(), std::max(final.cert.worst_gap, 0.0), final.cert.worst_t,
            report.iterations.generated_constraints);
        return report;
    }

    const PortfolioWeights& w = final.newton.weights;
    const DiscreteRandomVariable y = portfolio_return_variable(s, w);
    report.weights = w;
    report.expected_return = mean(y);
    report.converged = final.newton.converged;
    if (objective == Objective::max_return) {
        report.objective_value = report.expected_return;
    } else {
        const RiskValue risk = higher_order_risk(y, spec);
        report.objective_value = risk.rho;
        report.risk_value = risk.rho;
        report.q_star = risk.q_star;
        report.newton_q = final.newton.q;
    }

    report.active_thresholds.push_back(final.cert.worst_t);
    std::vector<double> binding;
    for (double t : T) {
        if (t == final.cert.worst_t) continue;
        if (dominance_gap_at(y, benchmark, p, t) >= -kActiveTolerance) binding.push_back(t);
    }
    std::sort(binding.begin(), binding.end());
    report.active_thresholds.insert(report.active_thresholds.end(), binding.begin(), binding.end());
    return report;
}

} // namespace

SolveReport optimize_max_return(const ScenarioSet& s, const DiscreteRandomVariable& benchmark, DominanceOrder p,
                                const SolverConfig& cfg) {
    return drive(s, benchmark, p, Objective::max_return, RiskSpec{}, cfg);
}

SolveReport optimize_min_risk(const ScenarioSet& s, const DiscreteRandomVariable& benchmark, DominanceOrder p,
                              const RiskSpec& spec, const SolverConfig& cfg) {
    return drive(s, benchmark, p, Objective::min_risk, spec, cfg);
}

} // namespace sdom
