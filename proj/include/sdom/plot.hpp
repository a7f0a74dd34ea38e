#pragma once

#include "sdom/dominance.hpp"
#include "sdom/optimize.hpp"

#include <string>
#include <vector>

namespace sdom {

/// Percentages rounded to one decimal by largest remainder, so they add up
/// to exactly 100.0.
[[nodiscard]] std::vector<double> rounded_percentages(const std::vector<double>& weights);

/// Self-contained SVG pie chart of the allocation with one-decimal percentage
/// labels and the optimized vs. benchmark return. Output depends only on the
/// report and labels. Throws DomainError for an infeasible report.
[[nodiscard]] std::string allocation_svg(const SolveReport& report, const std::vector<std::string>& labels);

/// SVG line plot of the dominance gap g(t) over the padded support, with the
/// zero line and the worst threshold of `cert` marked.
[[nodiscard]] std::string gap_curve_svg(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x,
                                        DominanceOrder p, const DominanceCertificate& cert);

} // namespace sdom
