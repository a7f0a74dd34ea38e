#include "support.hpp"

#include "sdom/barrier.hpp"
#include "sdom/errors.hpp"
#include "sdom/optimize.hpp"
#include "sdom/pso.hpp"
#include "sdom/report.hpp"
#include "sdom/risk.hpp"
#include "sdom/simplex.hpp"

#include <doctest.h>

using namespace sdom;

namespace {

ScenarioSet two_assets_first_better() {
    Eigen::MatrixXd r(2, 4);
    r << 1.0, 2.0, 0.5, 3.0,
         0.2, 1.5, 0.1, 2.0;
    return ScenarioSet(r);
}

WeightsEvaluator negative_mean(const ScenarioSet& s) {
    return [&s](std::span<const double> w) {
        const Eigen::VectorXd y = portfolio_returns(s, w);
        double m = 0.0;
        for (Eigen::Index j = 0; j < y.size(); ++j) m += s.scenario_probabilities()[j] * y[j];
        return -m;
    };
}

void check_report_contract(const ScenarioSet& s, const DiscreteRandomVariable& benchmark, const SolveReport& r,
                           const SolverConfig& cfg = {}) {
    REQUIRE_FALSE(r.infeasible);
    REQUIRE(r.weights);
    const auto fresh = verify(portfolio_return_variable(s, *r.weights), benchmark, DominanceOrder(r.order));
    CHECK(std::max(0.0, fresh.worst_gap) <= cfg.constraint_tol);
    CHECK(r.dominance_residual <= cfg.constraint_tol);
    CHECK(r.simplex_residual <= 1e-6);
    CHECK(*r.expected_return >= r.benchmark_return - 1e-8);
    CHECK(r.iterations.generated_constraints <= cfg.max_generated_constraints);
}

} // namespace

TEST_CASE("simplex projection") {
    CHECK(simplex_projection(std::vector<double>{2.0, 0.0}) == std::vector<double>{1.0, 0.0});
    const auto half = simplex_projection(std::vector<double>{0.6, 0.6});
    CHECK(half[0] == doctest::Approx(0.5));
    CHECK(half[1] == doctest::Approx(0.5));
    const std::vector<double> on{0.2, 0.3, 0.5};
    const auto same = simplex_projection(on);
    for (int i = 0; i < 3; ++i) CHECK(same[i] == doctest::Approx(on[i]).epsilon(1e-15));
    CHECK_THROWS_AS((void)simplex_projection(std::vector<double>{}), DimensionError);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(5);
        for (double& e : v) e = test::uniform(rng, -2.0, 2.0);
        const auto once = simplex_projection(v);
        const auto twice = simplex_projection(once);
        CHECK(simplex_residual(once) <= 1e-12);
        for (int i = 0; i < 5; ++i) CHECK(twice[i] == doctest::Approx(once[i]).epsilon(1e-14));
    }
}

TEST_CASE("simplex projection agrees with a grid search on the 1-simplex") {
    const std::vector<double> v{0.9, -0.3};
    double best = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 100000; ++i) {
        const double a = i / 100000.0;
        const double dist = (a - v[0]) * (a - v[0]) + (1 - a - v[1]) * (1 - a - v[1]);
        if (dist < best_d) best_d = dist, best = a;
    }
    CHECK(simplex_projection(v)[0] == doctest::Approx(best).epsilon(1e-5));
}

TEST_CASE("particle swarm") {
    const ScenarioSet s = two_assets_first_better();
    const WeightsEvaluator zero = [](std::span<const double>) { return 0.0; };

    SUBCASE("concentrates on the dominating asset") {
        const auto res = pso_search(2, negative_mean(s), zero, SolverConfig{});
        CHECK(res.weights[0] >= 1.0 - 1e-3);
    }
    SUBCASE("no-op budget returns the initial particle") {
        SolverConfig cfg;
        cfg.swarm_size = 1;
        cfg.pso_iterations = 0;
        const auto res = pso_search(2, negative_mean(s), zero, cfg);
        CHECK(res.weights.values() == std::vector<double>{0.5, 0.5});
        CHECK(res.iterations == 0);
    }
    SUBCASE("fixed seed is deterministic") {
        std::mt19937_64 rng(9);
        const ScenarioSet big = test::random_scenarios(rng, 6, 12);
        const auto a = pso_search(6, negative_mean(big), zero, SolverConfig{});
        const auto b = pso_search(6, negative_mean(big), zero, SolverConfig{});
        CHECK(a.weights.values() == b.weights.values());
        CHECK(a.objective == b.objective);
    }
    SUBCASE("penalty steers away from infeasible weights") {
        const WeightsEvaluator cap = [](std::span<const double> w) { return std::max(0.0, w[0] - 0.3); };
        const auto res = pso_search(2, negative_mean(s), cap, SolverConfig{});
        CHECK(res.weights[0] <= 0.3 + 1e-6);
        CHECK(res.weights[0] >= 0.3 - 1e-3);
    }
}

TEST_CASE("solver config validation") {
    SolverConfig cfg;
    cfg.swarm_size = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.newton_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("newton refinement without binding constraints reaches the best vertex") {
    std::mt19937_64 rng(10);
    const ScenarioSet s = test::random_scenarios(rng, 4, 10);
    const auto benchmark = DiscreteRandomVariable::constant(-50.0);
    const RefineProblem problem{s, benchmark, DominanceOrder(2.0)};
    const std::vector<double> T{-50.0};
    const SolverConfig cfg;
    const auto res = newton_refine(problem, PortfolioWeights::equal(4), T, cfg);
    REQUIRE(res.converged);

    Eigen::Index best = 0;
    s.asset_means().maxCoeff(&best);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(res.weights[i] - (i == best ? 1.0 : 0.0)) <= 1e-8);

    SUBCASE("external KKT residual matches the contract") {
        CHECK(barrier_kkt_residual(problem, T, res.point, cfg) <= cfg.newton_tol);
    }
    SUBCASE("restarting at the optimum is a fixed point") {
        const auto again = newton_refine(problem, res.point, T, cfg);
        CHECK(again.iterations <= 3);
        for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(again.weights[i] - res.weights[i]) <= 1e-10);
    }
}

TEST_CASE("newton refinement rejects empty thresholds and low orders") {
    const ScenarioSet s = two_assets_first_better();
    const auto benchmark = DiscreteRandomVariable::constant(0.0);
    const std::vector<double> none;
    CHECK_THROWS_AS((void)newton_refine({s, benchmark, DominanceOrder(2.0)}, PortfolioWeights::equal(2), none, {}),
                    DomainError);
    const std::vector<double> T{0.0};
    CHECK_THROWS_AS((void)newton_refine({s, benchmark, DominanceOrder(1.5)}, PortfolioWeights::equal(2), T, {}),
                    DomainError);
}

TEST_CASE("newton KKT residual is small whenever it reports convergence") {
    std::mt19937_64 rng(12);
    const SolverConfig cfg;
    for (int trial = 0; trial < 8; ++trial) {
        const ScenarioSet s = test::random_scenarios(rng, 3, 8);
        const auto benchmark = portfolio_return_variable(s, PortfolioWeights::equal(3));
        const RefineProblem problem{s, benchmark, DominanceOrder(trial % 2 == 0 ? 2.0 : 3.5)};
        const auto T = benchmark.outcomes();
        const auto res = newton_refine(problem, PortfolioWeights::equal(3), T, cfg);
        if (res.converged) CHECK(barrier_kkt_residual(problem, T, res.point, cfg) <= cfg.newton_tol);
    }
}

TEST_CASE("max-return on the fixture") {
    const ScenarioSet s = test::fama_french();
    const auto benchmark = portfolio_return_variable(s, PortfolioWeights::equal(5));
    for (double order : {2.0, 3.0, 4.0}) {
        CAPTURE(order);
        const auto r = optimize_max_return(s, benchmark, DominanceOrder(order));
        check_report_contract(s, benchmark, r);
        CHECK(*r.expected_return <= s.asset_means().maxCoeff() + 1e-8);
        CHECK(r.objective_value == r.expected_return);
        CHECK_FALSE(r.active_thresholds.empty());
        CHECK(r.benchmark_return == doctest::Approx(0.125).epsilon(1e-2));
    }
}

TEST_CASE("order 4 max-return lands near the reference allocation") {
    const ScenarioSet s = test::fama_french();
    const auto benchmark = portfolio_return_variable(s, PortfolioWeights::equal(5));
    const auto r = optimize_max_return(s, benchmark, DominanceOrder(4.0));
    check_report_contract(s, benchmark, r);
    CHECK(std::abs(*r.expected_return - 0.304) <= 0.02);
    CHECK(std::abs((*r.weights)[1] - 0.498) <= 0.05);
}

TEST_CASE("fractional-order min-risk on the fixture") {
    const ScenarioSet s = test::fama_french();
    const auto benchmark = portfolio_return_variable(s, PortfolioWeights::equal(5));
    const RiskSpec spec{0.5, 2.0};
    const auto r = optimize_min_risk(s, benchmark, DominanceOrder(4.7), spec);
    check_report_contract(s, benchmark, r);
    REQUIRE(r.q_star);
    REQUIRE(r.risk_value);
    const auto recomputed = higher_order_risk(portfolio_return_variable(s, *r.weights), spec);
    CHECK(std::abs(*r.q_star - recomputed.q_star) <= 1e-6);
    CHECK(*r.risk_value == doctest::Approx(recomputed.rho).epsilon(1e-12));
    CHECK(*r.risk_value <= higher_order_risk(benchmark, spec).rho + 1e-8);

    const auto& w = r.weights->values();
    CHECK(std::max_element(w.begin(), w.end()) - w.begin() == 1);
}

TEST_CASE("beta = 0, r = 1 min-risk agrees with max-return") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 3; ++trial) {
        const ScenarioSet s = test::random_scenarios(rng, 3, 6);
        const auto benchmark = portfolio_return_variable(s, PortfolioWeights::equal(3));
        const auto a = optimize_max_return(s, benchmark, DominanceOrder(2.0));
        const auto b = optimize_min_risk(s, benchmark, DominanceOrder(2.0), {0.0, 1.0});
        REQUIRE_FALSE(a.infeasible);
        REQUIRE_FALSE(b.infeasible);
        CHECK(std::abs(*a.expected_return - *b.expected_return) <= 1e-6);
        CHECK(std::abs(*b.risk_value + *b.expected_return) <= 1e-9);
    }
}

TEST_CASE("single asset") {
    Eigen::MatrixXd r(1, 4);
    r << 0.3, -0.2, 1.1, 0.4;
    const ScenarioSet s(r);
    const auto benchmark = portfolio_return_variable(s, PortfolioWeights({1.0}));
    const auto rep = optimize_max_return(s, benchmark, DominanceOrder(3.0));
    REQUIRE_FALSE(rep.infeasible);
    CHECK(rep.weights->values() == std::vector<double>{1.0});
    CHECK(*rep.expected_return == doctest::Approx(0.4));
    CHECK(rep.dominance_residual == 0.0);
}

TEST_CASE("an undominatable benchmark is reported infeasible") {
    const ScenarioSet s = two_assets_first_better();
    const auto benchmark = DiscreteRandomVariable::constant(10.0);
    SolverConfig cfg;
    cfg.max_generated_constraints = 5;
    const auto rep = optimize_max_return(s, benchmark, DominanceOrder(2.0), cfg);
    CHECK(rep.infeasible);
    CHECK_FALSE(rep.weights);
    CHECK_FALSE(rep.expected_return);
    CHECK_FALSE(rep.objective_value);
    CHECK_FALSE(rep.message.empty());
    CHECK(rep.dominance_residual > 0.0);
}

TEST_CASE("drivers reject orders below 2 and mismatched benchmarks stay supported") {
    const ScenarioSet s = two_assets_first_better();
    const auto benchmark = DiscreteRandomVariable::constant(0.0);
    CHECK_THROWS_AS((void)optimize_max_return(s, benchmark, DominanceOrder(1.5)), DomainError);
    CHECK_THROWS_AS((void)optimize_min_risk(s, benchmark, DominanceOrder(2.0), {1.0, 2.0}), DomainError);

    const std::vector<double> z{0.1, 0.4, 0.9}, p{0.2, 0.5, 0.3};
    const DiscreteRandomVariable general(z, p);
    const auto rep = optimize_max_return(s, general, DominanceOrder(2.5));
    check_report_contract(s, general, rep);
}

TEST_CASE("drivers are deterministic for a fixed seed") {
    const ScenarioSet s = test::fama_french();
    const auto benchmark = portfolio_return_variable(s, PortfolioWeights::equal(5));
    const auto a = optimize_max_return(s, benchmark, DominanceOrder(3.0));
    const auto b = optimize_max_return(s, benchmark, DominanceOrder(3.0));
    CHECK(a.weights->values() == b.weights->values());
    CHECK(solve_json(a) == solve_json(b));
}

TEST_CASE("small instances agree with a grid search") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 5; ++trial) {
        const ScenarioSet s = test::random_scenarios(rng, 2, 6);
        const auto benchmark = portfolio_return_variable(s, PortfolioWeights::equal(2));
        const auto rep = optimize_max_return(s, benchmark, DominanceOrder(2.0));
        check_report_contract(s, benchmark, rep);
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 10000; ++i) {
            const double a = i / 10000.0;
            const PortfolioWeights w({a, 1.0 - a});
            const auto y = portfolio_return_variable(s, w);
            if (verify(y, benchmark, DominanceOrder(2.0)).dominates) best = std::max(best, mean(y));
        }
        CHECK(std::abs(*rep.expected_return - best) <= 1e-3);
    }
}
