#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dfa::csv {

using Row = std::vector<std::string>;

/// Splits one line into fields. Double-quoted fields may contain the delimiter.
Row split_line(std::string_view line, char delimiter = ',');

/// Parses a whole document, skipping blank lines and stripping trailing '\r'.
std::vector<Row> parse(std::string_view text, char delimiter = ',');

/// Reads a file into memory. Throws DataError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Parses a decimal number; empty or malformed cells yield nullopt.
std::optional<double> parse_number(std::string_view cell);

/// Shortest round-trip representation, "" for NaN.
std::string format_number(double value);

std::string trim(std::string_view s);

}  // namespace dfa::csv
