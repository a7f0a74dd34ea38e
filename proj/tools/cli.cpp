#include "cli.hpp"

#include "sdom/dominance.hpp"
#include "sdom/errors.hpp"
#include "sdom/io.hpp"
#include "sdom/optimize.hpp"
#include "sdom/plot.hpp"
#include "sdom/report.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

namespace sdom::cli {
namespace {

struct VerifyArgs {
    std::string y_path;
    std::string x_path;
    double order = 0.0;
    double tol = kDefaultDominanceTolerance;
    std::string json_path;
    std::string plot_path;
    bool verbose = false;
};

struct SolveArgs {
    std::string data_path;
    double order = 0.0;
    std::string benchmark = "equal";
    std::string benchmark_weights;
    std::string benchmark_series;
    std::string prob_col;
    std::uint64_t seed = SolverConfig{}.rng_seed;
    double tol = SolverConfig{}.constraint_tol;
    int max_constraints = SolverConfig{}.max_generated_constraints;
    double beta = RiskSpec{}.beta;
    double r = RiskSpec{}.r;
    std::string loss_sign = "negate";
    std::string json_path;
    std::string plot_path;
    std::string dump_path;
    bool verbose = false;
};

void add_solve_options(CLI::App& cmd, SolveArgs& a, bool risk) {
    cmd.add_option("--data", a.data_path, "CSV of asset returns (optional leading Date column)")->required();
    cmd.add_option("--order", a.order, "stochastic dominance order p >= 2")->required();
    auto* bench = cmd.add_option("--benchmark", a.benchmark, "benchmark portfolio")
                      ->check(CLI::IsMember({"equal"}));
    auto* weights = cmd.add_option("--benchmark-weights", a.benchmark_weights, "benchmark weights file");
    auto* series = cmd.add_option("--benchmark-series", a.benchmark_series, "benchmark return series file");
    bench->excludes(weights)->excludes(series);
    weights->excludes(series);
    cmd.add_option("--prob-col", a.prob_col, "column holding scenario probabilities");
    cmd.add_option("--seed", a.seed, "PSO seed (SD_SEED overrides)");
    cmd.add_option("--tol", a.tol, "dominance tolerance of the returned portfolio")->check(CLI::PositiveNumber);
    cmd.add_option("--max-constraints", a.max_constraints, "threshold generation budget")->check(CLI::PositiveNumber);
    if (risk) {
        cmd.add_option("--beta", a.beta, "risk parameter in [0, 1)")->required();
        cmd.add_option("--r", a.r, "moment order of the risk measure, >= 1")->required();
        cmd.add_option("--loss-sign", a.loss_sign, "losses are negated returns or raw outcomes")
            ->check(CLI::IsMember({"negate", "raw"}));
    }
    cmd.add_option("--json", a.json_path, "write the JSON report here");
    cmd.add_option("--plot", a.plot_path, "write an SVG allocation chart here");
    cmd.add_option("--dump-scenarios", a.dump_path, "write the parsed scenarios back as CSV");
    cmd.add_flag("--verbose", a.verbose, "print residuals and iteration counts");
}

int run_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
    const DiscreteRandomVariable y = load_variable(a.y_path);
    const DiscreteRandomVariable x = load_variable(a.x_path);
    const DominanceOrder p(a.order);
    if (!(a.tol >= 0.0)) throw DomainError("tolerance must be nonnegative");
    const DominanceCertificate cert = verify(y, x, p, a.tol);
    out << verify_text(cert, a.verbose);
    if (!a.json_path.empty()) write_text_file(a.json_path, verify_json(cert));
    if (!a.plot_path.empty()) write_text_file(a.plot_path, gap_curve_svg(y, x, p, cert));
    (void)err;
    return cert.dominates ? kSuccess : kNotDominant;
}

int run_solve(SolveArgs a, Objective objective, std::ostream& out, std::ostream& err) {
    if (const char* env = std::getenv("SD_SEED"); env != nullptr && *env != '\0') {
        const std::string_view text(env);
        std::uint64_t seed = 0;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
        if (ec != std::errc{} || end != text.data() + text.size()) {
            throw DomainError(fmt::format("SD_SEED must be an unsigned integer, got '{}'", text));
        }
        a.seed = seed;
    }
    CsvOptions csv;
    if (!a.prob_col.empty()) csv.probability_column = a.prob_col;
    const ScenarioSet s = load_scenarios(a.data_path, csv);
    if (!a.dump_path.empty()) {
        std::ofstream dump(a.dump_path);
        if (!dump) throw IoError(fmt::format("cannot write '{}'", a.dump_path));
        write_scenarios(dump, s);
        if (!dump) throw IoError(fmt::format("cannot write '{}'", a.dump_path));
    }

    std::optional<DiscreteRandomVariable> benchmark;
    if (!a.benchmark_weights.empty()) {
        benchmark = portfolio_return_variable(s, load_weights(a.benchmark_weights, s.assets()));
    } else if (!a.benchmark_series.empty()) {
        benchmark = load_variable(a.benchmark_series);
    } else {
        benchmark = portfolio_return_variable(s, PortfolioWeights::equal(s.assets()));
    }

    SolverConfig cfg;
    cfg.rng_seed = a.seed;
    cfg.constraint_tol = a.tol;
    cfg.max_generated_constraints = a.max_constraints;
    const DominanceOrder p(a.order);
    SolveReport report;
    if (objective == Objective::max_return) {
        report = optimize_max_return(s, *benchmark, p, cfg);
    } else {
        RiskSpec spec{a.beta, a.r, a.loss_sign == "raw" ? LossSign::raw : LossSign::negate_returns};
        spec.validate();
        report = optimize_min_risk(s, *benchmark, p, spec, cfg);
    }

    out << solve_text(report, s.asset_labels(), a.verbose);
    if (!a.json_path.empty()) write_text_file(a.json_path, solve_json(report));
    if (!a.plot_path.empty()) {
        if (report.infeasible) {
            err << "sd: no plot written: the run is infeasible\n";
        } else {
            write_text_file(a.plot_path, allocation_svg(report, s.asset_labels()));
        }
    }
    return report.infeasible ? kNotDominant : kSuccess;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic dominance verification and dominance-constrained portfolio optimization", "sd"};
    app.require_subcommand(1);

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "does Y dominate X at the given order?");
    verify_cmd->add_option("--y", va.y_path, "CSV with outcome and optional probability column")->required();
    verify_cmd->add_option("--x", va.x_path, "CSV with outcome and optional probability column")->required();
    verify_cmd->add_option("--order", va.order, "stochastic order p >= 1")->required();
    verify_cmd->add_option("--tol", va.tol, "gap tolerance");
    verify_cmd->add_option("--json", va.json_path, "write the JSON certificate here");
    verify_cmd->add_option("--plot", va.plot_path, "write an SVG plot of the gap here");
    verify_cmd->add_flag("--verbose", va.verbose, "print the worst threshold and gap");

    SolveArgs max_args;
    auto* max_cmd = app.add_subcommand("max-return", "maximize expected return under dominance constraints");
    add_solve_options(*max_cmd, max_args, false);

    SolveArgs risk_args;
    auto* risk_cmd = app.add_subcommand("min-risk", "minimize the higher-order risk measure under dominance constraints");
    add_solve_options(*risk_cmd, risk_args, true);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        if (*verify_cmd) return run_verify(va, out, err);
        if (*max_cmd) return run_solve(max_args, Objective::max_return, out, err);
        return run_solve(risk_args, Objective::min_risk, out, err);
    } catch (const IoError& e) {
        err << "sd: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        err << "sd: " << e.what() << "\n";
        return kUsage;
    }
}

} // namespace sdom::cli
