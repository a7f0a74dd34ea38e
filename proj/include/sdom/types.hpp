#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sdom {

/// Finite discrete distribution: sorted distinct outcomes with positive
/// probabilities summing to one.
///
/// Construction sorts the outcomes, merges outcomes that agree to 1e-12
/// relative distance (summing their mass) and renormalizes probabilities whose
/// total is within 1e-9 of one. Anything worse is rejected with DomainError.
/// Instances are immutable.
class DiscreteRandomVariable {
public:
    DiscreteRandomVariable(std::span<const double> outcomes, std::span<const double> probabilities);

    /// Equiprobable outcomes.
    static DiscreteRandomVariable uniform(std::span<const double> outcomes);

    /// Point mass at `value`.
    static DiscreteRandomVariable constant(double value);

    [[nodiscard]] const std::vector<double>& outcomes() const noexcept { return outcomes_; }
    [[nodiscard]] const std::vector<double>& probabilities() const noexcept { return probabilities_; }
    [[nodiscard]] std::size_t size() const noexcept { return outcomes_.size(); }
    [[nodiscard]] double min() const noexcept { return outcomes_.front(); }
    [[nodiscard]] double max() const noexcept { return outcomes_.back(); }

    friend bool operator==(const DiscreteRandomVariable&, const DiscreteRandomVariable&) = default;

private:
    std::vector<double> outcomes_;
    std::vector<double> probabilities_;
};

[[nodiscard]] double mean(const DiscreteRandomVariable& v) noexcept;

/// d x n matrix of asset returns (rows = assets, columns = scenarios) in
/// percent, plus scenario probabilities and asset labels.
class ScenarioSet {
public:
    /// Uniform scenario probabilities and labels Asset_1..Asset_d.
    explicit ScenarioSet(Eigen::MatrixXd returns);
    ScenarioSet(Eigen::MatrixXd returns, std::vector<double> scenario_probabilities,
                std::vector<std::string> asset_labels);

    [[nodiscard]] const Eigen::MatrixXd& returns() const noexcept { return returns_; }
    [[nodiscard]] const std::vector<double>& scenario_probabilities() const noexcept { return probabilities_; }
    [[nodiscard]] const std::vector<std::string>& asset_labels() const noexcept { return labels_; }
    [[nodiscard]] std::size_t assets() const noexcept { return static_cast<std::size_t>(returns_.rows()); }
    [[nodiscard]] std::size_t scenarios() const noexcept { return static_cast<std::size_t>(returns_.cols()); }

    /// Probability-weighted mean return of each asset.
    [[nodiscard]] Eigen::VectorXd asset_means() const;

private:
    Eigen::MatrixXd returns_;
    std::vector<double> probabilities_;
    std::vector<std::string> labels_;
};

/// Long-only weights on the probability simplex.
class PortfolioWeights {
public:
    static constexpr double kDefaultTolerance = 1e-8;

    explicit PortfolioWeights(std::vector<double> weights, double tolerance = kDefaultTolerance);

    static PortfolioWeights equal(std::size_t d);

    [[nodiscard]] const std::vector<double>& values() const noexcept { return weights_; }
    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return weights_[i]; }
    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> as_vector() const noexcept {
        return {weights_.data(), static_cast<Eigen::Index>(weights_.size())};
    }

    /// |sum - 1| + sum of negative parts.
    [[nodiscard]] double simplex_residual() const noexcept;

private:
    std::vector<double> weights_;
};

[[nodiscard]] double simplex_residual(std::span<const double> weights) noexcept;

/// Stochastic-dominance order p >= 1 (real valued).
class DominanceOrder {
public:
    explicit DominanceOrder(double p);
    [[nodiscard]] double value() const noexcept { return p_; }
    /// Moment order p - 1 of the lower partial moments compared at this order.
    [[nodiscard]] double moment() const noexcept { return p_ - 1.0; }
    [[nodiscard]] bool is_integer() const noexcept;

private:
    double p_;
};

enum class LossSign { negate_returns, raw };

/// Parameters of the higher-order risk functional
/// rho(L) = min_q q + ||(L - q)_+||_r / (1 - beta).
struct RiskSpec {
    double beta = 0.5;
    double r = 2.0;
    LossSign loss_sign = LossSign::negate_returns;

    /// Throws DomainError unless beta in [0, 1) and r >= 1.
    void validate() const;
};

/// Outcome j is dot(w, column j); probabilities are the scenario probabilities.
[[nodiscard]] DiscreteRandomVariable portfolio_return_variable(const ScenarioSet& s, const PortfolioWeights& w);

/// Unmerged scenario-wise portfolio returns xi^T w.
[[nodiscard]] Eigen::VectorXd portfolio_returns(const ScenarioSet& s, std::span<const double> w);

} // namespace sdom
