#pragma once

#include "sdom/types.hpp"

#include <span>
#include <vector>

namespace sdom {

struct RiskValue {
    double rho = 0.0;     // risk in return units
    double q_star = 0.0;  // smallest minimizer of the inner problem
};

/// Losses L_i derived from the outcomes of v according to spec.loss_sign.
[[nodiscard]] DiscreteRandomVariable loss_variable(const DiscreteRandomVariable& v, const RiskSpec& spec);

/// phi(q) = q + (sum_i p_i (L_i - q)_+^r)^{1/r} / (1 - beta) evaluated on the losses of v.
[[nodiscard]] double risk_objective(const DiscreteRandomVariable& v, const RiskSpec& spec, double q);

/// rho = min_q phi(q).
///
/// For r = 1 this is CVaR at level beta and the minimizer is the lower
/// beta-quantile of the losses. For beta = 0 the infimum is the mean loss; it
/// is attained at q = min L when r = 1 and only approached as q -> -inf when
/// r > 1, in which case q_star is reported as min L.
[[nodiscard]] RiskValue higher_order_risk(const DiscreteRandomVariable& v, const RiskSpec& spec);

/// Gradient of phi(q; w) in the weights at fixed q, through L_j = -/+ w . xi_j.
/// Returns zero when no scenario loss exceeds q.
[[nodiscard]] std::vector<double> risk_gradient_in_weights(const ScenarioSet& s, const PortfolioWeights& w, double q,
                                                           const RiskSpec& spec);

/// phi(q; w) on unmerged scenario losses, the quantity risk_gradient_in_weights differentiates.
[[nodiscard]] double risk_objective_in_weights(const ScenarioSet& s, std::span<const double> w, double q,
                                               const RiskSpec& spec);

} // namespace sdom
