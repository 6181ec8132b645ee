#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memfuse {

using NumericRows = std::vector<std::vector<double>>;

// Headerless comma-separated decimal floats, one vector per line. Blank lines
// are skipped. Throws InputError naming the line/column of the first
// unparsable or non-finite cell, or of a row whose width differs from
// `expected_cols` (or from the first row when not given).
NumericRows read_numeric_csv(const std::filesystem::path& path, std::optional<std::size_t> expected_cols = {});
NumericRows parse_numeric_csv(std::string_view text, const std::string& source,
                              std::optional<std::size_t> expected_cols = {});

// Shortest round-trip representation when `decimals` is empty, fixed-point otherwise.
std::string format_double(double v, std::optional<int> decimals = {});
std::string format_numeric_csv(const NumericRows& rows, std::optional<int> decimals = {});
void write_numeric_csv(const std::filesystem::path& path, const NumericRows& rows,
                       std::optional<int> decimals = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace memfuse
