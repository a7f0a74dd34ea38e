#pragma once

#include "sdom/types.hpp"

#include <cstddef>
#include <vector>

namespace sdom {

/// Controls the finite threshold search used by verification.
///
/// Lengths are multiples of the combined support range of the two variables:
/// thresholds are drawn from [min - range_margin * range, max + tail_horizon * range].
struct SearchConfig {
    double tail_horizon = 10.0;
    int tail_probes = 64;
    double range_margin = 1.0;
    /// Sub-intervals per gap between consecutive atoms scanned for sign
    /// changes of the gap derivative.
    int subdivisions = 16;
    double bracket_width = 1e-12;
    int max_root_iterations = 200;
};

/// E[(t - Z)_+^k]. For k = 0 this is P(Z < t).
/// Throws DomainError if k < 0 or t is not finite.
[[nodiscard]] double lower_partial_moment(const DiscreteRandomVariable& v, double t, double k);

/// g(t) = LPM(y, t, p-1) - LPM(x, t, p-1). Positive means y fails to dominate x at t.
[[nodiscard]] double dominance_gap_at(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x,
                                      DominanceOrder p, double t);

/// Derivative of the gap in t, valid away from atoms when p < 2.
[[nodiscard]] double dominance_gap_slope(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x,
                                         DominanceOrder p, double t);

struct ThresholdSet {
    std::vector<double> points;  // ascending, distinct
    /// Intervals where the stationary-point search did not converge and fell
    /// back to endpoint + midpoint sampling.
    int degraded_intervals = 0;
};

/// Finite set of thresholds on which the supremum of the gap is attained:
/// every atom of x and y, every local maximum of the gap between atoms (p != 1, 2),
/// midpoints between atoms (p = 1) and a geometric grid of tail probes.
[[nodiscard]] ThresholdSet critical_thresholds(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x,
                                               DominanceOrder p, const SearchConfig& cfg = {});

struct DominanceCertificate {
    bool dominates = false;
    double order = 0.0;
    double worst_t = 0.0;
    double worst_gap = 0.0;
    std::size_t checked_points = 0;
    double tolerance = 0.0;
    /// mean(y) >= mean(x) - tolerance; necessary for dominance at every order.
    bool mean_condition = false;
    int degraded_intervals = 0;
};

inline constexpr double kDefaultDominanceTolerance = 1e-8;

/// Does y dominate x at order p? Evaluates the gap on critical_thresholds and
/// checks the tail (mean) condition.
[[nodiscard]] DominanceCertificate verify(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x,
                                          DominanceOrder p, double tol = kDefaultDominanceTolerance,
                                          const SearchConfig& cfg = {});

} // namespace sdom
