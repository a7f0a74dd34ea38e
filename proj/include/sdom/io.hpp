#pragma once

#include "sdom/types.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace sdom {

struct CsvOptions {
    /// Header of a column holding scenario probabilities; uniform when absent.
    std::optional<std::string> probability_column;
};

/// Reads a header row followed by one scenario per row. A leading column
/// named Date/date/DATE is dropped; every other column is an asset.
/// Throws IoError naming the row and column of any malformed cell, and when
/// fewer than two scenarios are present.
[[nodiscard]] ScenarioSet parse_scenarios(std::istream& in, const CsvOptions& options = {},
                                          std::string_view source = "<input>");
[[nodiscard]] ScenarioSet load_scenarios(const std::filesystem::path& path, const CsvOptions& options = {});

/// One-variable table: an outcome column plus an optional column named
/// probability/prob/p (uniform when missing). A Date column is dropped, so a
/// single return series loads as an equiprobable variable.
[[nodiscard]] DiscreteRandomVariable parse_variable(std::istream& in, std::string_view source = "<input>");
[[nodiscard]] DiscreteRandomVariable load_variable(const std::filesystem::path& path);

/// One weight per line, either "weight" or "label,weight"; an optional
/// header line is skipped. Requires exactly `assets` entries.
[[nodiscard]] PortfolioWeights parse_weights(std::istream& in, std::size_t assets,
                                             std::string_view source = "<input>");
[[nodiscard]] PortfolioWeights load_weights(const std::filesystem::path& path, std::size_t assets);

/// Writes the scenarios back as CSV (asset columns, then a probability
/// column) with 17 significant digits.
void write_scenarios(std::ostream& out, const ScenarioSet& s);

/// Throws IoError when the file cannot be created or written.
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace sdom
