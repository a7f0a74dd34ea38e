#include "sdom/risk.hpp"

#include "sdom/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

namespace sdom {

namespace {

double sign_of(LossSign s) noexcept { return s == LossSign::negate_returns ? -1.0 : 1.0; }

struct TailMoments {
    double s_r = 0.0;        // sum p (L - q)_+^r
    double s_r_minus_1 = 0.0;  // sum p (L - q)_+^{r-1}
};

TailMoments tail_moments(const DiscreteRandomVariable& losses, double q, double r) noexcept {
    TailMoments m;
    const auto& z = losses.outcomes();
    const auto& p = losses.probabilities();
    for (std::size_t i = z.size(); i-- > 0 && z[i] > q;) {
        const double e = z[i] - q;
        const double e_rm1 = r == 2.0 ? e : std::pow(e, r - 1.0);
        m.s_r_minus_1 += p[i] * e_rm1;
        m.s_r += p[i] * e_rm1 * e;
    }
    return m;
}

double phi(const DiscreteRandomVariable& losses, double q, const RiskSpec& spec) noexcept {
    const TailMoments m = tail_moments(losses, q, spec.r);
    const double norm = spec.r == 1.0 ? m.s_r : std::pow(m.s_r, 1.0 / spec.r);
    return q + norm / (1.0 - spec.beta);
}

// Derivative of phi in q for r > 1; phi is C^1 except possibly at max L.
double phi_slope(const DiscreteRandomVariable& losses, double q, const RiskSpec& spec) noexcept {
    const TailMoments m = tail_moments(losses, q, spec.r);
    if (m.s_r <= 0.0) return 1.0;
    return 1.0 - m.s_r_minus_1 * std::pow(m.s_r, 1.0 / spec.r - 1.0) / (1.0 - spec.beta);
}

} // namespace

DiscreteRandomVariable loss_variable(const DiscreteRandomVariable& v, const RiskSpec& spec) {
    if (spec.loss_sign == LossSign::raw) return v;
    std::vector<double> losses(v.outcomes());
    for (double& l : losses) l = -l;
    return {losses, v.probabilities()};
}

double risk_objective(const DiscreteRandomVariable& v, const RiskSpec& spec, double q) {
    spec.validate();
    return phi(loss_variable(v, spec), q, spec);
}

RiskValue higher_order_risk(const DiscreteRandomVariable& v, const RiskSpec& spec) {
    spec.validate();
    const DiscreteRandomVariable losses = loss_variable(v, spec);
    const double lmin = losses.min();
    const double lmax = losses.max();

    if (losses.size() == 1) return {lmin, lmin};
    if (spec.beta == 0.0) return {mean(losses), lmin};

    if (spec.r == 1.0) {
        // Right slope of phi is 1 - P(L > q) / (1 - beta); the smallest
        // minimizer is the first atom whose cumulative mass reaches beta.
        const auto& z = losses.outcomes();
        const auto& p = losses.probabilities();
        double cumulative = 0.0;
        double q = lmax;
        for (std::size_t i = 0; i < z.size(); ++i) {
            cumulative += p[i];
            if (cumulative >= spec.beta - 1e-12) {
                q = z[i];
                break;
            }
        }
        return {phi(losses, q, spec), q};
    }

    const double range = lmax - lmin;
    double lo = lmin - range;
    for (int expand = 0; expand < 60 && phi_slope(losses, lo, spec) >= 0.0; ++expand) {
        lo -= range * std::ldexp(1.0, expand);
    }
    double hi = lmax;
    // phi is convex: bisect for the smallest q with nonnegative slope.
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (phi_slope(losses, mid, spec) >= 0.0) hi = mid; else lo = mid;
    }
    const double value_hi = phi(losses, hi, spec);
    const double value_lo = phi(losses, lo, spec);
    return value_lo <= value_hi ? RiskValue{value_lo, lo} : RiskValue{value_hi, hi};
}

double risk_objective_in_weights(const ScenarioSet& s, std::span<const double> w, double q, const RiskSpec& spec) {
    spec.validate();
    const Eigen::VectorXd z = portfolio_returns(s, w);
    const double sgn = sign_of(spec.loss_sign);
    const auto& p = s.scenario_probabilities();
    double total = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double e = sgn * z[j] - q;
        if (e > 0.0) total += p[static_cast<std::size_t>(j)] * std::pow(e, spec.r);
    }
    return q + std::pow(total, 1.0 / spec.r) / (1.0 - spec.beta);
}

std::vector<double> risk_gradient_in_weights(const ScenarioSet& s, const PortfolioWeights& w, double q,
                                             const RiskSpec& spec) {
    spec.validate();
    const Eigen::VectorXd z = portfolio_returns(s, w.values());
    const double sgn = sign_of(spec.loss_sign);
    const auto& p = s.scenario_probabilities();

    double s_r = 0.0;
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.assets()));
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double e = sgn * z[j] - q;
        if (e <= 0.0) continue;
        const double pj = p[static_cast<std::size_t>(j)];
        const double e_rm1 = spec.r == 1.0 ? 1.0 : std::pow(e, spec.r - 1.0);
        s_r += pj * e_rm1 * e;
        direction += (pj * e_rm1 * sgn) * s.returns().col(j);
    }
    std::vector<double> grad(s.assets(), 0.0);
    if (s_r <= 0.0) return grad;
    const double scale = std::pow(s_r, 1.0 / spec.r - 1.0) / (1.0 - spec.beta);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = scale * direction[static_cast<Eigen::Index>(i)];
    return grad;
}

} // namespace sdom
