#include "sdom/dominance.hpp"
#include "sdom/errors.hpp"
#include "sdom/io.hpp"
#include "sdom/optimize.hpp"
#include "sdom/plot.hpp"
#include "sdom/report.hpp"
#include "sdom/risk.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <variant>

namespace py = pybind11;
using namespace sdom;

namespace {

using Benchmark = std::optional<std::variant<std::vector<double>, DiscreteRandomVariable>>;

DiscreteRandomVariable make_variable(const std::vector<double>& outcomes,
                                     const std::optional<std::vector<double>>& probabilities) {
    return probabilities ? DiscreteRandomVariable(outcomes, *probabilities) : DiscreteRandomVariable::uniform(outcomes);
}

DiscreteRandomVariable resolve_benchmark(const ScenarioSet& s, const Benchmark& benchmark) {
    if (!benchmark) return portfolio_return_variable(s, PortfolioWeights::equal(s.assets()));
    if (const auto* v = std::get_if<DiscreteRandomVariable>(&*benchmark)) return *v;
    return portfolio_return_variable(s, PortfolioWeights(std::get<std::vector<double>>(*benchmark)));
}

SolverConfig make_config(std::uint64_t seed, double constraint_tol, int max_constraints) {
    SolverConfig cfg;
    cfg.rng_seed = seed;
    cfg.constraint_tol = constraint_tol;
    cfg.max_generated_constraints = max_constraints;
    return cfg;
}

LossSign parse_loss_sign(const std::string& text) {
    if (text == "negate") return LossSign::negate_returns;
    if (text == "raw") return LossSign::raw;
    throw DomainError("loss_sign must be 'negate' or 'raw'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stochastic dominance verification and dominance-constrained portfolio optimization";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const IoError& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        }
    });

    py::class_<DiscreteRandomVariable>(m, "DiscreteRandomVariable")
        .def(py::init(&make_variable), py::arg("outcomes"), py::arg("probabilities") = py::none())
        .def_property_readonly("outcomes", &DiscreteRandomVariable::outcomes)
        .def_property_readonly("probabilities", &DiscreteRandomVariable::probabilities)
        .def_property_readonly("mean", [](const DiscreteRandomVariable& v) { return mean(v); })
        .def("__len__", &DiscreteRandomVariable::size)
        .def("__repr__", [](const DiscreteRandomVariable& v) {
            return "DiscreteRandomVariable(" + std::to_string(v.size()) + " atoms)";
        });

    py::class_<ScenarioSet>(m, "ScenarioSet")
        .def(py::init([](Eigen::MatrixXd returns, std::optional<std::vector<double>> probabilities,
                         std::optional<std::vector<std::string>> labels) {
                 const auto n = static_cast<std::size_t>(returns.cols());
                 const auto d = static_cast<std::size_t>(returns.rows());
                 if (!probabilities && !labels) return ScenarioSet(std::move(returns));
                 std::vector<std::string> names;
                 if (labels) {
                     names = *labels;
                 } else {
                     for (std::size_t i = 0; i < d; ++i) names.push_back("Asset_" + std::to_string(i + 1));
                 }
                 return ScenarioSet(std::move(returns),
                                    probabilities ? *probabilities : std::vector<double>(n, 1.0 / double(n)),
                                    std::move(names));
             }),
             py::arg("returns"), py::arg("probabilities") = py::none(), py::arg("labels") = py::none(),
             "returns is a d x n array: one row per asset, one column per scenario")
        .def_property_readonly("returns", &ScenarioSet::returns)
        .def_property_readonly("probabilities", &ScenarioSet::scenario_probabilities)
        .def_property_readonly("labels", &ScenarioSet::asset_labels)
        .def_property_readonly("assets", &ScenarioSet::assets)
        .def_property_readonly("scenarios", &ScenarioSet::scenarios)
        .def("portfolio", [](const ScenarioSet& s, const std::vector<double>& w) {
            return portfolio_return_variable(s, PortfolioWeights(w));
        }, py::arg("weights"));

    py::class_<DominanceCertificate>(m, "DominanceCertificate")
        .def_readonly("dominates", &DominanceCertificate::dominates)
        .def_readonly("order", &DominanceCertificate::order)
        .def_readonly("worst_t", &DominanceCertificate::worst_t)
        .def_readonly("worst_gap", &DominanceCertificate::worst_gap)
        .def_readonly("checked_points", &DominanceCertificate::checked_points)
        .def_readonly("tolerance", &DominanceCertificate::tolerance)
        .def_readonly("mean_condition", &DominanceCertificate::mean_condition)
        .def("__bool__", [](const DominanceCertificate& c) { return c.dominates; })
        .def("text", [](const DominanceCertificate& c, bool verbose) { return verify_text(c, verbose); },
             py::arg("verbose") = false)
        .def("to_json", &verify_json);

    py::class_<SolveReport>(m, "SolveReport")
        .def_property_readonly("command", [](const SolveReport& r) { return std::string(command_name(r.objective_kind)); })
        .def_readonly("order", &SolveReport::order)
        .def_property_readonly("weights", [](const SolveReport& r) -> std::optional<std::vector<double>> {
            if (!r.weights) return std::nullopt;
            return r.weights->values();
        })
        .def_readonly("active_thresholds", &SolveReport::active_thresholds)
        .def_readonly("q_star", &SolveReport::q_star)
        .def_readonly("objective_value", &SolveReport::objective_value)
        .def_readonly("expected_return", &SolveReport::expected_return)
        .def_readonly("benchmark_return", &SolveReport::benchmark_return)
        .def_readonly("risk_value", &SolveReport::risk_value)
        .def_readonly("simplex_residual", &SolveReport::simplex_residual)
        .def_readonly("dominance_residual", &SolveReport::dominance_residual)
        .def_readonly("kkt_residual", &SolveReport::kkt_residual)
        .def_readonly("converged", &SolveReport::converged)
        .def_readonly("infeasible", &SolveReport::infeasible)
        .def_readonly("message", &SolveReport::message)
        .def_readonly("seed", &SolveReport::seed)
        .def("to_json", &solve_json)
        .def("text", &solve_text, py::arg("labels") = std::vector<std::string>{}, py::arg("verbose") = false)
        .def("allocation_svg", &allocation_svg, py::arg("labels") = std::vector<std::string>{});

    m.def("lower_partial_moment", &lower_partial_moment, py::arg("v"), py::arg("t"), py::arg("k"));

    m.def(
        "verify",
        [](const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, double order, double tol) {
            return verify(y, x, DominanceOrder(order), tol);
        },
        py::arg("y"), py::arg("x"), py::arg("order"), py::arg("tol") = kDefaultDominanceTolerance);

    m.def(
        "higher_order_risk",
        [](const DiscreteRandomVariable& v, double beta, double r, const std::string& loss_sign) {
            const RiskValue rv = higher_order_risk(v, {beta, r, parse_loss_sign(loss_sign)});
            return py::make_tuple(rv.rho, rv.q_star);
        },
        py::arg("v"), py::arg("beta"), py::arg("r"), py::arg("loss_sign") = "negate",
        "Returns (rho, q_star).");

    m.def(
        "max_return",
        [](const ScenarioSet& s, double order, const Benchmark& benchmark, std::uint64_t seed, double constraint_tol,
           int max_constraints) {
            const auto bench = resolve_benchmark(s, benchmark);
            const auto cfg = make_config(seed, constraint_tol, max_constraints);
            py::gil_scoped_release release;
            return optimize_max_return(s, bench, DominanceOrder(order), cfg);
        },
        py::arg("scenarios"), py::arg("order"), py::arg("benchmark") = py::none(),
        py::arg("seed") = SolverConfig{}.rng_seed, py::arg("constraint_tol") = SolverConfig{}.constraint_tol,
        py::arg("max_constraints") = SolverConfig{}.max_generated_constraints,
        "benchmark: None (equal weights), a weight list, or a DiscreteRandomVariable.");

    m.def(
        "min_risk",
        [](const ScenarioSet& s, double order, double beta, double r, const Benchmark& benchmark,
           const std::string& loss_sign, std::uint64_t seed, double constraint_tol, int max_constraints) {
            const auto bench = resolve_benchmark(s, benchmark);
            const RiskSpec spec{beta, r, parse_loss_sign(loss_sign)};
            const auto cfg = make_config(seed, constraint_tol, max_constraints);
            py::gil_scoped_release release;
            return optimize_min_risk(s, bench, DominanceOrder(order), spec, cfg);
        },
        py::arg("scenarios"), py::arg("order"), py::arg("beta"), py::arg("r"), py::arg("benchmark") = py::none(),
        py::arg("loss_sign") = "negate", py::arg("seed") = SolverConfig{}.rng_seed,
        py::arg("constraint_tol") = SolverConfig{}.constraint_tol,
        py::arg("max_constraints") = SolverConfig{}.max_generated_constraints);

    m.def(
        "load_scenarios",
        [](const std::filesystem::path& path, std::optional<std::string> prob_col) {
            return load_scenarios(path, CsvOptions{std::move(prob_col)});
        },
        py::arg("path"), py::arg("prob_col") = py::none());
    m.def("load_variable", &load_variable, py::arg("path"));
}
