#pragma once

#include "sdom/dominance.hpp"
#include "sdom/io.hpp"
#include "sdom/types.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace sdom::test {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(SDOM_DATA_DIR) / name; }

inline ScenarioSet fama_french() { return load_scenarios(data_path("fama_french_2024_07.csv")); }

inline DiscreteRandomVariable example_y() {
    const std::vector<double> z{3, 5, 7, 9, 11}, p{0.15, 0.25, 0.30, 0.20, 0.10};
    return {z, p};
}

inline DiscreteRandomVariable example_x() {
    const std::vector<double> z{2, 4, 6, 8, 10}, p{0.10, 0.30, 0.30, 0.20, 0.10};
    return {z, p};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Up to `max_atoms` outcomes on a 0.01 lattice in [lo, hi] with random positive probabilities.
inline DiscreteRandomVariable random_variable(std::mt19937_64& rng, int max_atoms, double lo = 0.0, double hi = 1.0) {
    const int n = std::uniform_int_distribution<int>(1, max_atoms)(rng);
    std::vector<double> z(n), p(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        z[i] = lo + std::round(uniform(rng, 0.0, hi - lo) * 100.0) / 100.0;
        p[i] = uniform(rng, 0.05, 1.0);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return {z, p};
}

/// A right-shifted copy of x (first-order improvement), so y dominates x at every order.
inline DiscreteRandomVariable improved_copy(std::mt19937_64& rng, const DiscreteRandomVariable& x) {
    std::vector<double> z = x.outcomes();
    for (double& v : z) v += std::round(uniform(rng, 0.0, 0.3) * 100.0) / 100.0;
    return {z, x.probabilities()};
}

inline ScenarioSet random_scenarios(std::mt19937_64& rng, int d, int n, double lo = -2.0, double hi = 3.0) {
    Eigen::MatrixXd r(d, n);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < n; ++j) r(i, j) = uniform(rng, lo, hi);
    return ScenarioSet(r);
}

/// Gap maximum over `points` uniform thresholds spanning the search range of
/// `cfg`, plus every atom (where the gap has kinks).
inline double dense_grid_max(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p,
                             int points, const SearchConfig& cfg = {}) {
    const double lo = std::min(y.min(), x.min());
    const double hi = std::max(y.max(), x.max());
    double range = hi - lo;
    if (!(range > 0.0)) range = std::max(1.0, std::abs(hi));
    const double a = lo - cfg.range_margin * range;
    const double b = hi + cfg.tail_horizon * range;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        best = std::max(best, dominance_gap_at(y, x, p, a + (b - a) * i / (points - 1)));
    }
    for (double t : y.outcomes()) best = std::max(best, dominance_gap_at(y, x, p, t));
    for (double t : x.outcomes()) best = std::max(best, dominance_gap_at(y, x, p, t));
    return best;
}

/// Largest gap over the critical thresholds.
inline double critical_max(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p) {
    double best = -std::numeric_limits<double>::infinity();
    for (double t : critical_thresholds(y, x, p).points) best = std::max(best, dominance_gap_at(y, x, p, t));
    return best;
}

/// CVaR at level beta by the sorted-tail formula.
inline double sorted_tail_cvar(std::vector<double> losses, std::vector<double> probs, double beta) {
    std::vector<std::size_t> idx(losses.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
    double tail = 1.0 - beta;
    double total = 0.0;
    for (std::size_t i : idx) {
        const double take = std::min(probs[i], tail);
        total += take * losses[i];
        tail -= take;
        if (tail <= 0.0) break;
    }
    return total / (1.0 - beta);
}

} // namespace sdom::test
