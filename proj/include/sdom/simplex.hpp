#pragma once

#include "sdom/types.hpp"

#include <span>
#include <vector>

namespace sdom {

/// Euclidean projection onto {x >= 0, sum x = 1} by the sorted-threshold rule.
/// Throws DimensionError on empty input.
[[nodiscard]] std::vector<double> simplex_projection(std::span<const double> v);

[[nodiscard]] PortfolioWeights project_to_simplex(std::span<const double> v);

} // namespace sdom
