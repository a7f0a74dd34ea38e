#include "sdom/simplex.hpp"

#include "sdom/errors.hpp"

#include <algorithm>
#include <functional>

namespace sdom {

std::vector<double> simplex_projection(std::span<const double> v) {
    if (v.empty()) throw DimensionError("cannot project an empty vector onto the simplex");
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    double cumulative = 0.0;
    double threshold = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        cumulative += sorted[i];
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) threshold = candidate;
    }

    std::vector<double> x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = std::max(v[i] - threshold, 0.0);
    return x;
}

PortfolioWeights project_to_simplex(std::span<const double> v) { return PortfolioWeights(simplex_projection(v)); }

} // namespace sdom
