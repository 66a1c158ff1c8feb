#pragma once

#include <optional>
#include <string>
#include <vector>

namespace prognosis::csv {

// Splits one line on commas. No quoting: every format in this project uses
// identifiers, dates and numbers only. Trailing '\r' is stripped.
std::vector<std::string> split_line(const std::string& line);

// Shortest round-trip representation (std::to_chars). NaN is the empty
// string, matching the missing-value convention of the dataset files.
std::string format_double(double v);

// Parses a full-field double; empty string -> NaN. Returns nullopt on junk.
std::optional<double> parse_double(const std::string& field);

std::optional<long long> parse_int(const std::string& field);

std::string join(const std::vector<std::string>& fields);

}  // namespace prognosis::csv
