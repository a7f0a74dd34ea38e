#include "sdom/io.hpp"

#include "sdom/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace sdom {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> to_number(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) return std::nullopt;
    return value;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

Table read_table(std::istream& in, std::string_view source) {
    Table table;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line_number == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw IoError(fmt::format("{}: row {} has {} fields, header has {}", source, line_number, cells.size(),
                                      table.header.size()));
        }
        table.rows.push_back(std::move(cells));
        table.line_numbers.push_back(line_number);
    }
    if (in.bad()) throw IoError(fmt::format("{}: read failed", source));
    if (table.header.empty()) throw IoError(fmt::format("{}: missing header row", source));
    return table;
}

double cell(const Table& t, std::size_t row, std::size_t col, std::string_view source) {
    const std::string& text = t.rows[row][col];
    const auto value = to_number(text);
    if (!value || !std::isfinite(*value)) {
        throw IoError(fmt::format("{}: row {}, column '{}': '{}' is not a finite number", source,
                                  t.line_numbers[row], t.header[col], text));
    }
    return *value;
}

bool is_date_header(std::string_view name) { return name == "Date" || name == "date" || name == "DATE"; }

bool is_probability_header(std::string name) {
    std::ranges::transform(name, name.begin(), [](unsigned char c) { return std::tolower(c); });
    return name == "probability" || name == "prob" || name == "p";
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    return in;
}

} // namespace

ScenarioSet parse_scenarios(std::istream& in, const CsvOptions& options, std::string_view source) {
    const Table t = read_table(in, source);
    std::vector<std::size_t> asset_cols;
    std::optional<std::size_t> prob_col;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c == 0 && is_date_header(t.header[c])) continue;
        if (options.probability_column && t.header[c] == *options.probability_column) {
            prob_col = c;
            continue;
        }
        asset_cols.push_back(c);
    }
    if (options.probability_column && !prob_col) {
        throw IoError(fmt::format("{}: no column named '{}'", source, *options.probability_column));
    }
    if (asset_cols.empty()) throw IoError(fmt::format("{}: no asset columns", source));
    const std::size_t n = t.rows.size();
    if (n < 2) throw IoError(fmt::format("{}: need at least 2 scenarios, found {}", source, n));

    Eigen::MatrixXd returns(static_cast<Eigen::Index>(asset_cols.size()), static_cast<Eigen::Index>(n));
    std::vector<double> probabilities(n, 1.0 / static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t a = 0; a < asset_cols.size(); ++a) {
            returns(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) = cell(t, j, asset_cols[a], source);
        }
        if (prob_col) probabilities[j] = cell(t, j, *prob_col, source);
    }
    std::vector<std::string> labels;
    for (std::size_t c : asset_cols) labels.push_back(t.header[c]);
    return ScenarioSet(std::move(returns), std::move(probabilities), std::move(labels));
}

ScenarioSet load_scenarios(const std::filesystem::path& path, const CsvOptions& options) {
    auto in = open(path);
    return parse_scenarios(in, options, path.string());
}

DiscreteRandomVariable parse_variable(std::istream& in, std::string_view source) {
    const Table t = read_table(in, source);
    std::optional<std::size_t> outcome_col;
    std::optional<std::size_t> prob_col;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c == 0 && is_date_header(t.header[c])) continue;
        if (!prob_col && is_probability_header(t.header[c])) {
            prob_col = c;
        } else if (!outcome_col) {
            outcome_col = c;
        } else {
            throw IoError(fmt::format("{}: expected one outcome column and an optional probability column", source));
        }
    }
    if (!outcome_col) throw IoError(fmt::format("{}: no outcome column", source));
    if (t.rows.empty()) throw IoError(fmt::format("{}: no data rows", source));
    std::vector<double> outcomes;
    std::vector<double> probabilities;
    for (std::size_t j = 0; j < t.rows.size(); ++j) {
        outcomes.push_back(cell(t, j, *outcome_col, source));
        if (prob_col) probabilities.push_back(cell(t, j, *prob_col, source));
    }
    if (!prob_col) return DiscreteRandomVariable::uniform(outcomes);
    return DiscreteRandomVariable(outcomes, probabilities);
}

DiscreteRandomVariable load_variable(const std::filesystem::path& path) {
    auto in = open(path);
    return parse_variable(in, path.string());
}

PortfolioWeights parse_weights(std::istream& in, std::size_t assets, std::string_view source) {
    std::vector<double> weights;
    std::string line;
    std::size_t line_number = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        const auto value = to_number(cells.back());
        if (!value && !seen_content) {
            seen_content = true;  // header
            continue;
        }
        seen_content = true;
        if (!value || !std::isfinite(*value)) {
            throw IoError(fmt::format("{}: row {}: '{}' is not a finite weight", source, line_number, cells.back()));
        }
        weights.push_back(*value);
    }
    if (weights.size() != assets) {
        throw IoError(fmt::format("{}: expected {} weights, found {}", source, assets, weights.size()));
    }
    return PortfolioWeights(std::move(weights));
}

PortfolioWeights load_weights(const std::filesystem::path& path, std::size_t assets) {
    auto in = open(path);
    return parse_weights(in, assets, path.string());
}

void write_scenarios(std::ostream& out, const ScenarioSet& s) {
    for (const auto& label : s.asset_labels()) out << label << ',';
    out << "probability\n";
    const auto& r = s.returns();
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        for (Eigen::Index i = 0; i < r.rows(); ++i) out << fmt::format("{:.17g},", r(i, j));
        out << fmt::format("{:.17g}\n", s.scenario_probabilities()[static_cast<std::size_t>(j)]);
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

} // namespace sdom
