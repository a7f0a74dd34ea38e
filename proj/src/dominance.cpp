#include "sdom/dominance.hpp"

#include "sdom/errors.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdom {

namespace {

// Sum over atoms strictly below t of p_i (t - z_i)^k. Any real k; negative
// exponents are only meaningful away from atoms.
double shortfall_sum(const DiscreteRandomVariable& v, double t, double k) noexcept {
    const auto& z = v.outcomes();
    const auto& p = v.probabilities();
    double total = 0.0;
    if (k == 0.0) {
        for (std::size_t i = 0; i < z.size() && z[i] < t; ++i) total += p[i];
        return total;
    }
    if (k == 1.0) {
        for (std::size_t i = 0; i < z.size() && z[i] < t; ++i) total += p[i] * (t - z[i]);
        return total;
    }
    for (std::size_t i = 0; i < z.size() && z[i] < t; ++i) total += p[i] * std::pow(t - z[i], k);
    return total;
}

double gap_curvature(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, double p, double t) noexcept {
    const double k = p - 3.0;
    return (p - 1.0) * (p - 2.0) * (shortfall_sum(y, t, k) - shortfall_sum(x, t, k));
}

std::vector<double> merged_atoms(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x) {
    std::vector<double> atoms;
    atoms.reserve(y.size() + x.size());
    std::merge(y.outcomes().begin(), y.outcomes().end(), x.outcomes().begin(), x.outcomes().end(),
               std::back_inserter(atoms));
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return atoms;
}

struct RootResult {
    double t;
    bool converged;
};

// Safeguarded Newton on the gap slope inside [lo, hi] with slope(lo) > 0 > slope(hi).
RootResult slope_root(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p, double lo,
                      double hi, const SearchConfig& cfg) {
    double t = 0.5 * (lo + hi);
    double previous_width = hi - lo;
    for (int it = 0; it < cfg.max_root_iterations; ++it) {
        const double f = dominance_gap_slope(y, x, p, t);
        if (f == 0.0) return {t, true};
        if (f > 0.0) lo = t; else hi = t;
        const double width = hi - lo;
        if (width <= cfg.bracket_width * std::max(1.0, std::abs(t))) return {0.5 * (lo + hi), true};

        const double fp = gap_curvature(y, x, p.value(), t);
        double next = 0.5 * (lo + hi);
        if (std::isfinite(fp) && fp != 0.0 && width < 0.5 * previous_width) {
            const double newton = t - f / fp;
            if (newton > lo && newton < hi) {
                if (std::abs(newton - t) <= cfg.bracket_width * std::max(1.0, std::abs(t))) return {newton, true};
                next = newton;
            }
        }
        previous_width = width;
        t = next;
    }
    return {0.5 * (lo + hi), false};
}

void scan_for_maxima(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p, double a,
                     double b, const SearchConfig& cfg, ThresholdSet& out) {
    if (!(b > a)) return;
    const int m = std::max(cfg.subdivisions, 1);
    // Endpoints are nudged inside so one-sided limits at atoms are used.
    const double nudge = 1e-9 * (b - a);
    double prev_t = a + nudge;
    double prev_f = dominance_gap_slope(y, x, p, prev_t);
    for (int i = 1; i <= m; ++i) {
        const double t = i == m ? b - nudge : a + (b - a) * static_cast<double>(i) / m;
        const double f = dominance_gap_slope(y, x, p, t);
        if (prev_f > 0.0 && f < 0.0) {
            const auto root = slope_root(y, x, p, prev_t, t, cfg);
            if (root.converged) {
                out.points.push_back(root.t);
            } else {
                out.points.insert(out.points.end(), {prev_t, 0.5 * (prev_t + t), t});
                ++out.degraded_intervals;
            }
        } else if (prev_f > 0.0 && f == 0.0) {
            out.points.push_back(t);
        }
        prev_t = t;
        prev_f = f;
    }
}

} // namespace

double lower_partial_moment(const DiscreteRandomVariable& v, double t, double k) {
    if (!std::isfinite(k) || k < 0.0) throw DomainError(fmt::format("lower partial moment order must be >= 0, got {}", k));
    if (!std::isfinite(t)) throw DomainError("lower partial moment threshold must be finite");
    return shortfall_sum(v, t, k);
}

double dominance_gap_at(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p,
                        double t) {
    const double k = p.moment();
    return lower_partial_moment(y, t, k) - lower_partial_moment(x, t, k);
}

double dominance_gap_slope(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p,
                           double t) {
    const double k = p.value() - 2.0;
    if (p.value() == 1.0) return 0.0;
    return (p.value() - 1.0) * (shortfall_sum(y, t, k) - shortfall_sum(x, t, k));
}

ThresholdSet critical_thresholds(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p,
                                 const SearchConfig& cfg) {
    ThresholdSet out;
    const std::vector<double> atoms = merged_atoms(y, x);
    const double lo = atoms.front();
    const double hi = atoms.back();
    double range = hi - lo;
    if (!(range > 0.0)) range = std::max(1.0, std::abs(hi));

    out.points = atoms;
    out.points.push_back(lo - cfg.range_margin * range);

    // Geometric tail offsets from 1e-3 * range out to tail_horizon * range.
    std::vector<double> tail;
    const int probes = std::max(cfg.tail_probes, 1);
    const double first = std::min(1e-3, cfg.tail_horizon) * range;
    const double last = cfg.tail_horizon * range;
    const double ratio = probes > 1 ? std::pow(last / first, 1.0 / (probes - 1)) : 1.0;
    double offset = first;
    for (int i = 0; i < probes; ++i) {
        tail.push_back(i == probes - 1 ? hi + last : hi + offset);
        offset *= ratio;
    }
    out.points.insert(out.points.end(), tail.begin(), tail.end());

    const double order = p.value();
    if (order == 1.0) {
        for (std::size_t i = 0; i + 1 < atoms.size(); ++i) out.points.push_back(0.5 * (atoms[i] + atoms[i + 1]));
    } else if (order != 2.0) {
        std::vector<double> knots = atoms;
        knots.insert(knots.end(), tail.begin(), tail.end());
        for (std::size_t i = 0; i + 1 < knots.size(); ++i) scan_for_maxima(y, x, p, knots[i], knots[i + 1], cfg, out);
    }

    std::sort(out.points.begin(), out.points.end());
    out.points.erase(std::unique(out.points.begin(), out.points.end()), out.points.end());
    return out;
}

DominanceCertificate verify(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p,
                            double tol, const SearchConfig& cfg) {
    if (!(tol >= 0.0)) throw DomainError(fmt::format("dominance tolerance must be >= 0, got {}", tol));
    const ThresholdSet thresholds = critical_thresholds(y, x, p, cfg);

    DominanceCertificate cert;
    cert.order = p.value();
    cert.tolerance = tol;
    cert.checked_points = thresholds.points.size();
    cert.degraded_intervals = thresholds.degraded_intervals;
    cert.worst_gap = -std::numeric_limits<double>::infinity();
    for (double t : thresholds.points) {
        const double g = dominance_gap_at(y, x, p, t);
        if (g > cert.worst_gap) {
            cert.worst_gap = g;
            cert.worst_t = t;
        }
    }
    cert.mean_condition = mean(y) >= mean(x) - tol;
    cert.dominates = cert.worst_gap <= tol && cert.mean_condition;
    return cert;
}

} // namespace sdom
