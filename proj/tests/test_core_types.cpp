#include "support.hpp"

#include "sdom/errors.hpp"

#include <doctest.h>

using namespace sdom;

TEST_CASE("mean of the five-atom example") {
    CHECK(mean(test::example_y()) == doctest::Approx(6.70).epsilon(1e-14));
    CHECK(mean(test::example_x()) == doctest::Approx(5.80).epsilon(1e-14));
    CHECK(mean(DiscreteRandomVariable::constant(-3.25)) == -3.25);
}

TEST_CASE("equal-weight benchmark of the fixture has mean 0.125 percent") {
    const ScenarioSet s = test::fama_french();
    CHECK(s.assets() == 5);
    CHECK(s.scenarios() == 22);
    const auto bench = portfolio_return_variable(s, PortfolioWeights::equal(5));
    CHECK(std::abs(mean(bench) - 0.125) < 1e-3);
}

TEST_CASE("construction sorts outcomes and merges duplicates") {
    const std::vector<double> z{3.0, 1.0, 3.0, 2.0}, p{0.25, 0.25, 0.25, 0.25};
    const DiscreteRandomVariable v(z, p);
    CHECK(v.outcomes() == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(v.probabilities()[2] == doctest::Approx(0.5));
    CHECK(v.min() == 1.0);
    CHECK(v.max() == 3.0);
}

TEST_CASE("outcomes within 1e-12 relative distance merge, preserving mass and mean") {
    const std::vector<double> z{1.0, 1.0 + 1e-13, 5.0}, p{0.2, 0.3, 0.5};
    const DiscreteRandomVariable v(z, p);
    REQUIRE(v.size() == 2);
    CHECK(v.probabilities()[0] + v.probabilities()[1] == doctest::Approx(1.0).epsilon(1e-12));
    const double raw_mean = 0.2 * z[0] + 0.3 * z[1] + 0.5 * z[2];
    CHECK(std::abs(mean(v) - raw_mean) < 1e-12);
}

TEST_CASE("probabilities are renormalized within 1e-9 and rejected beyond") {
    const std::vector<double> z{1.0, 2.0};
    const std::vector<double> close{0.5, 0.5 + 5e-10};
    const DiscreteRandomVariable v(z, close);
    CHECK(std::abs(v.probabilities()[0] + v.probabilities()[1] - 1.0) < 1e-15);
    const std::vector<double> far{0.5, 0.6};
    CHECK_THROWS_AS(DiscreteRandomVariable(z, far), DomainError);
    const std::vector<double> negative{1.5, -0.5};
    CHECK_THROWS_AS(DiscreteRandomVariable(z, negative), DomainError);
    const std::vector<double> short_p{1.0};
    CHECK_THROWS_AS(DiscreteRandomVariable(z, short_p), DimensionError);
    CHECK_THROWS_AS(DiscreteRandomVariable::uniform(std::vector<double>{}), DimensionError);
    const std::vector<double> nan_z{1.0, std::nan("")};
    CHECK_THROWS_AS(DiscreteRandomVariable::uniform(nan_z), DomainError);
}

TEST_CASE("construction is deterministic") {
    std::mt19937_64 rng(7);
    const auto a = test::random_variable(rng, 8);
    const DiscreteRandomVariable b(a.outcomes(), a.probabilities());
    const DiscreteRandomVariable c(a.outcomes(), a.probabilities());
    CHECK(b == c);
}

TEST_CASE("portfolio return variable") {
    SUBCASE("single asset reproduces its row") {
        Eigen::MatrixXd r(1, 3);
        r << 0.5, -1.0, 2.0;
        const ScenarioSet s(r);
        const auto v = portfolio_return_variable(s, PortfolioWeights({1.0}));
        CHECK(v.outcomes() == std::vector<double>{-1.0, 0.5, 2.0});
        for (double p : v.probabilities()) CHECK(p == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("symmetric columns merge into one atom") {
        Eigen::MatrixXd r(2, 2);
        r << 1, 3, 3, 1;
        const ScenarioSet s(r);
        const auto v = portfolio_return_variable(s, PortfolioWeights({0.5, 0.5}));
        REQUIRE(v.size() == 1);
        CHECK(v.outcomes()[0] == 2.0);
        CHECK(v.probabilities()[0] == doctest::Approx(1.0));
    }
    SUBCASE("dimension mismatch") {
        const ScenarioSet s = test::fama_french();
        CHECK_THROWS_AS((void)portfolio_return_variable(s, PortfolioWeights({0.5, 0.5})), DimensionError);
    }
}

TEST_CASE("portfolio returns are linear in the weights") {
    std::mt19937_64 rng(11);
    const ScenarioSet s = test::random_scenarios(rng, 4, 9);
    const std::vector<double> w1{0.1, 0.2, 0.3, 0.4}, w2{0.7, 0.0, 0.3, 0.0};
    const double a = 0.35;
    std::vector<double> mix(4);
    for (int i = 0; i < 4; ++i) mix[i] = a * w1[i] + (1 - a) * w2[i];
    const Eigen::VectorXd lhs = portfolio_returns(s, mix);
    const Eigen::VectorXd rhs = a * portfolio_returns(s, w1) + (1 - a) * portfolio_returns(s, w2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("scenario set validation") {
    CHECK_THROWS_AS(ScenarioSet(Eigen::MatrixXd::Zero(2, 1)), DimensionError);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 3);
    r(1, 2) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(ScenarioSet{r}, DomainError);
    CHECK_THROWS_AS(ScenarioSet(Eigen::MatrixXd::Zero(2, 3), {0.5, 0.5, 0.5}, {"a", "b"}), DomainError);
    const ScenarioSet s(Eigen::MatrixXd::Zero(2, 3));
    CHECK(s.asset_labels() == std::vector<std::string>{"Asset_1", "Asset_2"});
}

TEST_CASE("portfolio weights, order and risk spec validation") {
    CHECK_THROWS_AS(PortfolioWeights({0.5, 0.6}), DomainError);
    CHECK_THROWS_AS(PortfolioWeights({1.5, -0.5}), DomainError);
    CHECK_THROWS_AS(PortfolioWeights(std::vector<double>{}), DimensionError);
    CHECK_NOTHROW(PortfolioWeights({0.5, 0.5 + 5e-9}));
    CHECK(simplex_residual(std::vector<double>{0.6, 0.6, -0.1}) == doctest::Approx(0.1 + 0.1));

    CHECK_THROWS_AS(DominanceOrder(0.5), DomainError);
    CHECK(DominanceOrder(4.7).moment() == doctest::Approx(3.7));
    CHECK(DominanceOrder(3.0).is_integer());
    CHECK_FALSE(DominanceOrder(4.7).is_integer());

    CHECK_THROWS_AS((RiskSpec{1.0, 2.0}.validate()), DomainError);
    CHECK_THROWS_AS((RiskSpec{0.5, 0.5}.validate()), DomainError);
    CHECK_NOTHROW((RiskSpec{0.0, 1.0}.validate()));
}
