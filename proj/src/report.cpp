#include "sdom/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>

namespace sdom {
namespace {

std::string number(double v) {
    if (!std::isfinite(v)) return "null";
    return fmt::format("{:.17g}", v);
}

std::string number(const std::optional<double>& v) { return v ? number(*v) : "null"; }

std::string number_array(const std::vector<double>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ", ";
        out += number(values[i]);
    }
    return out + "]";
}

} // namespace

std::string_view command_name(Objective objective) noexcept {
    return objective == Objective::max_return ? "max-return" : "min-risk";
}

std::string format_order(double p) { return fmt::format("{}", p); }

std::string verify_text(const DominanceCertificate& cert, bool verbose) {
    std::string out = fmt::format("Y {} X in stochastic order {}\n", cert.dominates ? "dominates" : "does not dominate",
                                  format_order(cert.order));
    if (verbose) {
        out += fmt::format("Worst threshold t: {:.10g}\n", cert.worst_t);
        out += fmt::format("Worst dominance gap: {:.6e} (tolerance {:.1e})\n", cert.worst_gap, cert.tolerance);
        out += fmt::format("Mean condition: {}\n", cert.mean_condition ? "satisfied" : "violated");
        out += fmt::format("Thresholds checked: {}\n", cert.checked_points);
        if (cert.degraded_intervals > 0) {
            out += fmt::format("Intervals sampled after root-finder failure: {}\n", cert.degraded_intervals);
        }
    }
    return out;
}

std::string solve_text(const SolveReport& report, const std::vector<std::string>& labels, bool verbose) {
    const std::string order = format_order(report.order);
    std::string out;
    if (report.infeasible) {
        out += fmt::format("No allocation satisfies stochastic dominance of order {} against the benchmark.\n", order);
        if (!report.message.empty()) out += report.message + "\n";
    } else {
        out += fmt::format("Optimal asset allocation (SD order {}):\n", order);
        std::size_t width = 0;
        for (const auto& l : labels) width = std::max(width, l.size());
        const auto& w = report.weights->values();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const std::string label = i < labels.size() ? labels[i] : fmt::format("Asset_{}", i + 1);
            out += fmt::format("  {:<{}}  {:6.2f}%\n", label, width, 100.0 * w[i]);
        }
        if (report.objective_kind == Objective::max_return) {
            out += fmt::format("Maximized expected return: {:.4f}% (benchmark {:.4f}%)\n", *report.expected_return,
                               report.benchmark_return);
        } else {
            out += fmt::format("Minimized risk measure: {:.6g} at q_opt = {:.6g}\n", *report.risk_value,
                               *report.q_star);
            out += fmt::format("Expected return: {:.4f}% (benchmark {:.4f}%)\n", *report.expected_return,
                               report.benchmark_return);
        }
        if (!report.active_thresholds.empty()) {
            out += "t_opt: ";
            for (std::size_t i = 0; i < report.active_thresholds.size(); ++i) {
                out += fmt::format("{}{:.6g}", i > 0 ? ", " : "", report.active_thresholds[i]);
            }
            out += "\n";
        }
        out += fmt::format("Portfolio dominates the benchmark in stochastic order {}\n", order);
    }
    if (verbose) {
        out += fmt::format("Simplex Constraints residuals: {}\n", report.simplex_residual);
        out += fmt::format("Stochastic Dominance Constraints residuals: {}\n", report.dominance_residual);
        out += fmt::format("Converged: {} (KKT residual {:.3e})\n", report.converged ? "yes" : "no",
                           report.kkt_residual);
        const auto& it = report.iterations;
        out += fmt::format("Iterations: pso {}, newton {}, barrier levels {}, rounds {}, generated thresholds {}\n",
                           it.pso, it.newton, it.barrier_levels, it.constraint_rounds, it.generated_constraints);
    }
    return out;
}

std::string solve_json(const SolveReport& report) {
    std::vector<double> weights;
    if (report.weights) weights = report.weights->values();
    std::string out = "{\n";
    out += fmt::format("  \"command\": \"{}\",\n", command_name(report.objective_kind));
    out += fmt::format("  \"order\": {},\n", number(report.order));
    out += fmt::format("  \"weights\": {},\n", report.weights ? number_array(weights) : "null");
    out += fmt::format("  \"active_thresholds\": {},\n", number_array(report.active_thresholds));
    out += fmt::format("  \"q_star\": {},\n", number(report.q_star));
    out += fmt::format("  \"objective\": {},\n", number(report.objective_value));
    out += fmt::format("  \"expected_return\": {},\n", number(report.expected_return));
    out += fmt::format("  \"benchmark_return\": {},\n", number(report.benchmark_return));
    out += fmt::format("  \"risk_value\": {},\n", number(report.risk_value));
    out += fmt::format("  \"residuals\": {{\"simplex\": {}, \"dominance\": {}}},\n", number(report.simplex_residual),
                       number(report.dominance_residual));
    out += fmt::format("  \"converged\": {},\n", report.converged);
    out += fmt::format("  \"infeasible\": {},\n", report.infeasible);
    out += fmt::format("  \"seed\": {}\n", report.seed);
    return out + "}\n";
}

std::string verify_json(const DominanceCertificate& cert) {
    std::string out = "{\n";
    out += "  \"command\": \"verify\",\n";
    out += fmt::format("  \"order\": {},\n", number(cert.order));
    out += fmt::format("  \"dominates\": {},\n", cert.dominates);
    out += fmt::format("  \"worst_t\": {},\n", number(cert.worst_t));
    out += fmt::format("  \"worst_gap\": {},\n", number(cert.worst_gap));
    out += fmt::format("  \"tolerance\": {},\n", number(cert.tolerance));
    out += fmt::format("  \"checked_points\": {},\n", cert.checked_points);
    out += fmt::format("  \"mean_condition\": {}\n", cert.mean_condition);
    return out + "}\n";
}

} // namespace sdom
