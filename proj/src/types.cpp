#include "sdom/types.hpp"

#include "sdom/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sdom {

namespace {

constexpr double kMergeTolerance = 1e-12;
constexpr double kRenormalizeTolerance = 1e-9;

bool same_outcome(double a, double b) noexcept {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= kMergeTolerance * scale;
}

std::vector<double> checked_probabilities(std::span<const double> probabilities, const char* what) {
    std::vector<double> p(probabilities.begin(), probabilities.end());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i]) || p[i] <= 0.0) {
            throw DomainError(fmt::format("{}: probability {} at index {} must be positive and finite", what, p[i], i));
        }
    }
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(total - 1.0) > kRenormalizeTolerance) {
        throw DomainError(fmt::format("{}: probabilities sum to {:.17g}, not 1", what, total));
    }
    for (double& pi : p) pi /= total;
    return p;
}

} // namespace

DiscreteRandomVariable::DiscreteRandomVariable(std::span<const double> outcomes, std::span<const double> probabilities) {
    if (outcomes.empty()) throw DimensionError("random variable needs at least one outcome");
    if (outcomes.size() != probabilities.size()) {
        throw DimensionError(fmt::format("random variable has {} outcomes but {} probabilities", outcomes.size(),
                                         probabilities.size()));
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!std::isfinite(outcomes[i])) {
            throw DomainError(fmt::format("random variable: outcome at index {} is not finite", i));
        }
    }
    const auto p = checked_probabilities(probabilities, "random variable");

    std::vector<std::size_t> order(outcomes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return outcomes[a] < outcomes[b]; });

    // Groups are anchored at their smallest member; the merged atom sits at the
    // group's probability-weighted mean so the first moment is preserved.
    std::size_t i = 0;
    while (i < order.size()) {
        const double anchor = outcomes[order[i]];
        double mass = 0.0;
        double moment = 0.0;
        std::size_t j = i;
        while (j < order.size() && same_outcome(anchor, outcomes[order[j]])) {
            mass += p[order[j]];
            moment += p[order[j]] * outcomes[order[j]];
            ++j;
        }
        outcomes_.push_back(j - i == 1 ? anchor : moment / mass);
        probabilities_.push_back(mass);
        i = j;
    }
}

DiscreteRandomVariable DiscreteRandomVariable::uniform(std::span<const double> outcomes) {
    std::vector<double> p(outcomes.size(), outcomes.empty() ? 0.0 : 1.0 / static_cast<double>(outcomes.size()));
    return {outcomes, p};
}

DiscreteRandomVariable DiscreteRandomVariable::constant(double value) {
    const double one = 1.0;
    return {std::span(&value, 1), std::span(&one, 1)};
}

double mean(const DiscreteRandomVariable& v) noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m += v.probabilities()[i] * v.outcomes()[i];
    return m;
}

ScenarioSet::ScenarioSet(Eigen::MatrixXd returns)
    : ScenarioSet(returns, std::vector<double>(static_cast<std::size_t>(returns.cols()),
                                               returns.cols() > 0 ? 1.0 / static_cast<double>(returns.cols()) : 0.0),
                  {}) {}

ScenarioSet::ScenarioSet(Eigen::MatrixXd returns, std::vector<double> scenario_probabilities,
                         std::vector<std::string> asset_labels)
    : returns_(std::move(returns)), labels_(std::move(asset_labels)) {
    if (returns_.rows() < 1) throw DimensionError("scenario set needs at least one asset");
    if (returns_.cols() < 2) throw DimensionError("scenario set needs at least two scenarios");
    if (!returns_.allFinite()) {
        for (Eigen::Index i = 0; i < returns_.rows(); ++i)
            for (Eigen::Index j = 0; j < returns_.cols(); ++j)
                if (!std::isfinite(returns_(i, j)))
                    throw DomainError(fmt::format("scenario set: non-finite return for asset {} in scenario {}", i, j));
    }
    if (scenario_probabilities.size() != scenarios()) {
        throw DimensionError(fmt::format("scenario set has {} scenarios but {} probabilities", scenarios(),
                                         scenario_probabilities.size()));
    }
    probabilities_ = checked_probabilities(scenario_probabilities, "scenario set");
    if (labels_.empty()) {
        for (std::size_t i = 0; i < assets(); ++i) labels_.push_back(fmt::format("Asset_{}", i + 1));
    } else if (labels_.size() != assets()) {
        throw DimensionError(fmt::format("scenario set has {} assets but {} labels", assets(), labels_.size()));
    }
}

Eigen::VectorXd ScenarioSet::asset_means() const {
    const Eigen::Map<const Eigen::VectorXd> p(probabilities_.data(), static_cast<Eigen::Index>(probabilities_.size()));
    return returns_ * p;
}

PortfolioWeights::PortfolioWeights(std::vector<double> weights, double tolerance) : weights_(std::move(weights)) {
    if (weights_.empty()) throw DimensionError("portfolio weights must not be empty");
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!std::isfinite(weights_[i]) || weights_[i] < -tolerance) {
            throw DomainError(fmt::format("portfolio weight {} at index {} is negative or not finite", weights_[i], i));
        }
        total += weights_[i];
    }
    if (std::abs(total - 1.0) > tolerance) {
        throw DomainError(fmt::format("portfolio weights sum to {:.17g}, not 1", total));
    }
}

PortfolioWeights PortfolioWeights::equal(std::size_t d) {
    if (d == 0) throw DimensionError("portfolio weights must not be empty");
    return PortfolioWeights(std::vector<double>(d, 1.0 / static_cast<double>(d)));
}

double simplex_residual(std::span<const double> weights) noexcept {
    double total = 0.0;
    double negative = 0.0;
    for (double w : weights) {
        total += w;
        negative += std::max(-w, 0.0);
    }
    return std::abs(total - 1.0) + negative;
}

double PortfolioWeights::simplex_residual() const noexcept { return sdom::simplex_residual(weights_); }

DominanceOrder::DominanceOrder(double p) : p_(p) {
    if (!std::isfinite(p) || p < 1.0) throw DomainError(fmt::format("stochastic order must be >= 1, got {}", p));
}

bool DominanceOrder::is_integer() const noexcept { return p_ == std::floor(p_); }

void RiskSpec::validate() const {
    if (!std::isfinite(beta) || beta < 0.0 || beta >= 1.0) {
        throw DomainError(fmt::format("risk parameter beta must lie in [0, 1), got {}", beta));
    }
    if (!std::isfinite(r) || r < 1.0) throw DomainError(fmt::format("risk order r must be >= 1, got {}", r));
}

Eigen::VectorXd portfolio_returns(const ScenarioSet& s, std::span<const double> w) {
    if (w.size() != s.assets()) {
        throw DimensionError(fmt::format("portfolio has {} weights but scenario set has {} assets", w.size(), s.assets()));
    }
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
    return s.returns().transpose() * wv;
}

DiscreteRandomVariable portfolio_return_variable(const ScenarioSet& s, const PortfolioWeights& w) {
    const Eigen::VectorXd z = portfolio_returns(s, w.values());
    return {std::span(z.data(), static_cast<std::size_t>(z.size())), s.scenario_probabilities()};
}

} // namespace sdom
