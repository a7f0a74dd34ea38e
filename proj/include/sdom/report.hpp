#pragma once

#include "sdom/dominance.hpp"
#include "sdom/optimize.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sdom {

/// "max-return" or "min-risk".
[[nodiscard]] std::string_view command_name(Objective objective) noexcept;

/// Shortest round-trip decimal form of an order: 2 -> "2", 4.7 -> "4.7".
[[nodiscard]] std::string format_order(double p);

/// "Y dominates X in stochastic order 2" (or "does not dominate"); verbose
/// appends the worst threshold, its gap and the mean condition.
[[nodiscard]] std::string verify_text(const DominanceCertificate& cert, bool verbose);

/// Allocation table, objective values and dominance status; verbose adds
/// residuals and per-phase iteration counts. Labels name the assets.
[[nodiscard]] std::string solve_text(const SolveReport& report, const std::vector<std::string>& labels, bool verbose);

/// Fixed-key JSON document, doubles with 17 significant digits, null for
/// absent values.
[[nodiscard]] std::string solve_json(const SolveReport& report);

/// JSON for a verification: command, order, dominates, worst_t, worst_gap,
/// tolerance, checked_points, mean_condition.
[[nodiscard]] std::string verify_json(const DominanceCertificate& cert);

} // namespace sdom
