#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace slelab {

/// Decimal with 15 significant digits, '.' separator.
std::string format_number(double v);

/// RFC 4180 quoting: fields containing ',', '"', CR or LF are quoted.
std::string csv_field(std::string_view s);
std::string csv_line(const std::vector<std::string>& fields);

/// Parses CSV text into records. Lines starting with '#' outside quotes are
/// skipped; quoted fields may span lines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace slelab
