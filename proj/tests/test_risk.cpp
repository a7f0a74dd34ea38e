#include "support.hpp"

#include "sdom/errors.hpp"
#include "sdom/risk.hpp"

#include <doctest.h>

using namespace sdom;

namespace {

const RiskSpec kRawCvar{0.5, 1.0, LossSign::raw};

DiscreteRandomVariable random_losses(std::mt19937_64& rng, int n) {
    std::vector<double> z(n);
    for (double& v : z) v = test::uniform(rng, -5.0, 5.0);
    return DiscreteRandomVariable::uniform(z);
}

} // namespace

TEST_CASE("CVaR closed form") {
    const std::vector<double> z{0.0, 10.0};
    const auto v = DiscreteRandomVariable::uniform(z);
    const RiskValue rv = higher_order_risk(v, kRawCvar);
    CHECK(rv.rho == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(rv.q_star == 0.0);  // phi is flat on [0, 10]; the smallest minimizer wins
}

TEST_CASE("constant loss") {
    for (double r : {1.0, 2.0, 3.5}) {
        const RiskValue rv = higher_order_risk(DiscreteRandomVariable::constant(2.5), {0.7, r, LossSign::raw});
        CHECK(rv.rho == 2.5);
        CHECK(rv.q_star == 2.5);
    }
}

TEST_CASE("losses default to negated returns") {
    const std::vector<double> z{-4.0, 6.0};
    const auto v = DiscreteRandomVariable::uniform(z);
    CHECK(higher_order_risk(v, {0.5, 1.0}).rho == doctest::Approx(4.0));
    CHECK(loss_variable(v, {}).outcomes() == std::vector<double>{-6.0, 4.0});
}

TEST_CASE("beta = 0 gives the mean loss") {
    std::mt19937_64 rng(1);
    const auto v = random_losses(rng, 12);
    for (double r : {1.0, 2.0}) {
        CHECK(higher_order_risk(v, {0.0, r, LossSign::raw}).rho == doctest::Approx(mean(v)).epsilon(1e-12));
    }
}

TEST_CASE("rho equals phi at q_star and phi is minimal there") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto v = random_losses(rng, 3 + trial);
        const RiskSpec spec{test::uniform(rng, 0.05, 0.95), test::uniform(rng, 1.0, 4.0), LossSign::raw};
        const RiskValue rv = higher_order_risk(v, spec);
        CHECK(std::abs(rv.rho - risk_objective(v, spec, rv.q_star)) <= 1e-10);
        for (int i = 0; i < 1000; ++i) {
            const double q = test::uniform(rng, -12.0, 8.0);
            CHECK(rv.rho <= risk_objective(v, spec, q) + 1e-10);
        }
    }
}

TEST_CASE("r = 1 matches the sorted-tail CVaR") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 9;
        std::vector<double> z(n), p(n);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            z[i] = test::uniform(rng, -3.0, 3.0);
            p[i] = test::uniform(rng, 0.1, 1.0);
            total += p[i];
        }
        for (double& e : p) e /= total;
        const double beta = test::uniform(rng, 0.0, 0.95);
        const DiscreteRandomVariable v(z, p);
        CHECK(higher_order_risk(v, {beta, 1.0, LossSign::raw}).rho ==
              doctest::Approx(test::sorted_tail_cvar(v.outcomes(), v.probabilities(), beta)).epsilon(1e-9));
    }
}

TEST_CASE("translation equivariance") {
    std::mt19937_64 rng(4);
    const auto v = random_losses(rng, 15);
    std::vector<double> shifted = v.outcomes();
    for (double& e : shifted) e += 1.0;
    const RiskSpec spec{0.6, 2.0, LossSign::raw};
    CHECK(higher_order_risk(DiscreteRandomVariable(shifted, v.probabilities()), spec).rho ==
          doctest::Approx(higher_order_risk(v, spec).rho + 1.0).epsilon(1e-12));
}

TEST_CASE("risk rejects invalid parameters") {
    const auto v = DiscreteRandomVariable::constant(1.0);
    CHECK_THROWS_AS((void)higher_order_risk(v, {1.0, 2.0}), DomainError);
    CHECK_THROWS_AS((void)higher_order_risk(v, {0.5, 0.9}), DomainError);
}

TEST_CASE("weight gradient matches central differences") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const ScenarioSet s = test::random_scenarios(rng, 3, 8);
        std::vector<double> w{test::uniform(rng, 0.1, 1.0), test::uniform(rng, 0.1, 1.0), test::uniform(rng, 0.1, 1.0)};
        const double total = w[0] + w[1] + w[2];
        for (double& e : w) e /= total;
        const RiskSpec spec{test::uniform(rng, 0.0, 0.9), test::uniform(rng, 1.0, 3.0)};
        const double q = test::uniform(rng, -1.0, 0.5);
        const auto grad = risk_gradient_in_weights(s, PortfolioWeights(w), q, spec);
        for (std::size_t i = 0; i < 3; ++i) {
            auto up = w, down = w;
            up[i] += 1e-6;
            down[i] -= 1e-6;
            const double fd =
                (risk_objective_in_weights(s, up, q, spec) - risk_objective_in_weights(s, down, q, spec)) / 2e-6;
            CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("weight gradient vanishes when no loss exceeds q") {
    Eigen::MatrixXd r(2, 3);
    r << 1, 2, 3, 2, 1, 0.5;
    const ScenarioSet s(r);
    const auto grad = risk_gradient_in_weights(s, PortfolioWeights({0.5, 0.5}), 10.0, {0.5, 2.0});
    CHECK(grad == std::vector<double>{0.0, 0.0});
}

TEST_CASE("weight gradient with a single scenario in the tail, r = 1") {
    Eigen::MatrixXd r(2, 2);
    r << -2.0, 5.0, -1.0, 4.0;
    const ScenarioSet s(r, {0.25, 0.75}, {"a", "b"});
    const double beta = 0.4;
    // Losses 1.5 and -4.5; only the first exceeds q = 0.
    const auto grad = risk_gradient_in_weights(s, PortfolioWeights({0.5, 0.5}), 0.0, {beta, 1.0});
    CHECK(grad[0] == doctest::Approx(-0.25 * -2.0 / (1.0 - beta)));
    CHECK(grad[1] == doctest::Approx(-0.25 * -1.0 / (1.0 - beta)));
}

TEST_CASE("coherence on a common probability space") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 7;
        std::vector<double> l(n), bigger(n), other(n);
        for (int i = 0; i < n; ++i) {
            l[i] = test::uniform(rng, -4.0, 4.0);
            bigger[i] = l[i] + test::uniform(rng, 0.0, 1.0);
            other[i] = test::uniform(rng, -4.0, 4.0);
        }
        const RiskSpec spec{test::uniform(rng, 0.0, 0.9), test::uniform(rng, 1.0, 3.0), LossSign::raw};
        const auto rho = [&](const std::vector<double>& z) {
            return higher_order_risk(DiscreteRandomVariable::uniform(z), spec).rho;
        };
        const double a = test::uniform(rng, 0.2, 5.0);
        std::vector<double> scaled = l;
        for (double& e : scaled) e *= a;
        CHECK(std::abs(rho(scaled) - a * rho(l)) <= 1e-9 * std::max(1.0, std::abs(a * rho(l))));
        CHECK(rho(l) <= rho(bigger) + 1e-9);
        const double lam = test::uniform(rng, 0.0, 1.0);
        std::vector<double> mix(n);
        for (int i = 0; i < n; ++i) mix[i] = lam * l[i] + (1 - lam) * other[i];
        CHECK(rho(mix) <= lam * rho(l) + (1 - lam) * rho(other) + 1e-9);
    }
}
