#include "sdom/plot.hpp"

#include "sdom/errors.hpp"
#include "sdom/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sdom {
namespace {

constexpr std::array<const char*, 10> kPalette = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                                  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string svg_open(int width, int height) {
    return fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
                       "font-family=\"sans-serif\">\n<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
                       width, height);
}

} // namespace

std::vector<double> rounded_percentages(const std::vector<double>& weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<long long> tenths(weights.size());
    std::vector<double> remainder(weights.size());
    long long assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = 1000.0 * std::max(weights[i], 0.0) / total;
        tenths[i] = static_cast<long long>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(tenths[i]);
        assigned += tenths[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < 1000 && k < order.size(); ++k, ++assigned) ++tenths[order[k]];
    std::vector<double> out;
    for (long long t : tenths) out.push_back(static_cast<double>(t) / 10.0);
    return out;
}

std::string allocation_svg(const SolveReport& report, const std::vector<std::string>& labels) {
    if (report.infeasible || !report.weights) {
        throw DomainError("cannot plot an infeasible report: no allocation satisfies the dominance constraints");
    }
    const auto& w = report.weights->values();
    const std::vector<double> pct = rounded_percentages(w);
    constexpr double cx = 200.0, cy = 230.0, radius = 150.0;
    const int height = std::max(440, 90 + 24 * static_cast<int>(w.size()));

    std::string out = svg_open(680, height);
    out += fmt::format("<text x=\"20\" y=\"36\" font-size=\"20\">Optimal asset allocation (SD order {})</text>\n",
                       format_order(report.order));

    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double angle = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const char* colour = kPalette[i % kPalette.size()];
        const double share = std::max(w[i], 0.0) / total;
        if (share >= 1.0 - 1e-12) {
            out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" stroke=\"white\"/>\n", cx,
                               cy, radius, colour);
        } else if (share > 0.0) {
            const double a1 = angle + 2.0 * std::numbers::pi * share;
            out += fmt::format("<path d=\"M {:.2f} {:.2f} L {:.2f} {:.2f} A {:.2f} {:.2f} 0 {} 1 {:.2f} {:.2f} Z\" "
                               "fill=\"{}\" stroke=\"white\"/>\n",
                               cx, cy, cx + radius * std::sin(angle), cy - radius * std::cos(angle), radius, radius,
                               share > 0.5 ? 1 : 0, cx + radius * std::sin(a1), cy - radius * std::cos(a1), colour);
        }
        if (pct[i] >= 5.0) {
            const double mid = angle + std::numbers::pi * share;
            out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"13\" text-anchor=\"middle\" "
                               "fill=\"white\">{:.1f}%</text>\n",
                               cx + 0.62 * radius * std::sin(mid), cy - 0.62 * radius * std::cos(mid) + 4.0, pct[i]);
        }
        angle += 2.0 * std::numbers::pi * share;
    }

    for (std::size_t i = 0; i < w.size(); ++i) {
        const double y = 90.0 + 24.0 * static_cast<double>(i);
        const std::string label = i < labels.size() ? labels[i] : fmt::format("Asset_{}", i + 1);
        out += fmt::format("<rect x=\"400\" y=\"{:.2f}\" width=\"14\" height=\"14\" fill=\"{}\"/>\n", y - 12.0,
                           kPalette[i % kPalette.size()]);
        out += fmt::format("<text x=\"422\" y=\"{:.2f}\" font-size=\"14\">{} {:.1f}%</text>\n", y, escape(label),
                           pct[i]);
    }

    std::string note;
    if (report.objective_kind == Objective::max_return) {
        note = fmt::format("Maximized expected return {:.3f}%, benchmark return {:.3f}%", *report.expected_return,
                           report.benchmark_return);
    } else {
        note = fmt::format("Minimized risk {:.4g} (q_opt {:.4g}); portfolio return {:.3f}%, benchmark return {:.3f}%",
                           *report.risk_value, *report.q_star, *report.expected_return, report.benchmark_return);
    }
    out += fmt::format("<text x=\"20\" y=\"{}\" font-size=\"14\">{}</text>\n", height - 20, escape(note));
    return out + "</svg>\n";
}

std::string gap_curve_svg(const DiscreteRandomVariable& y, const DiscreteRandomVariable& x, DominanceOrder p,
                          const DominanceCertificate& cert) {
    constexpr int kSamples = 400;
    constexpr double left = 60.0, top = 50.0, plot_w = 560.0, plot_h = 300.0;
    const double lo0 = std::min(y.min(), x.min());
    const double hi0 = std::max(y.max(), x.max());
    const double pad = 0.1 * std::max(hi0 - lo0, 1.0);
    const double lo = lo0 - pad, hi = hi0 + pad;

    std::vector<double> t(kSamples + 1), g(kSamples + 1);
    for (int i = 0; i <= kSamples; ++i) {
        t[i] = lo + (hi - lo) * i / kSamples;
        g[i] = dominance_gap_at(y, x, p, t[i]);
    }
    double gmin = std::min(0.0, *std::min_element(g.begin(), g.end()));
    double gmax = std::max(0.0, *std::max_element(g.begin(), g.end()));
    if (gmax - gmin <= 0.0) gmax = gmin + 1.0;
    const auto px = [&](double v) { return left + plot_w * (v - lo) / (hi - lo); };
    const auto py = [&](double v) { return top + plot_h * (gmax - v) / (gmax - gmin); };

    std::string out = svg_open(680, 420);
    out += fmt::format("<text x=\"20\" y=\"30\" font-size=\"18\">Dominance gap g(t), order {}</text>\n",
                       format_order(p.value()));
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n", left, top,
                       plot_w, plot_h);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#888\" "
                       "stroke-dasharray=\"4 3\"/>\n",
                       left, py(0.0), left + plot_w, py(0.0));
    out += "<polyline fill=\"none\" stroke=\"#4e79a7\" stroke-width=\"2\" points=\"";
    for (int i = 0; i <= kSamples; ++i) out += fmt::format("{}{:.2f},{:.2f}", i > 0 ? " " : "", px(t[i]), py(g[i]));
    out += "\"/>\n";
    if (cert.worst_t >= lo && cert.worst_t <= hi) {
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"#e15759\"/>\n", px(cert.worst_t),
                           py(std::clamp(cert.worst_gap, gmin, gmax)));
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">t from {:.4g} to {:.4g}; g from {:.4g} to {:.4g}</text>\n",
                       left, top + plot_h + 24, lo, hi, gmin, gmax);
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"13\">Worst gap {:.4g} at t = {:.6g}: {}</text>\n", left,
                       top + plot_h + 48, cert.worst_gap, cert.worst_t,
                       cert.dominates ? "Y dominates X" : "Y does not dominate X");
    return out + "</svg>\n";
}

} // namespace sdom
