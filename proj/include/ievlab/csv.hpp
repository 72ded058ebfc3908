#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ievlab::csv {

/// Shortest text that round-trips the double exactly ("%.17g").
std::string format_double(double value);

/// Joins fields with commas.
std::string join(const std::vector<std::string>& fields);

/// Writes `content` to `path` via a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws FormatError if missing.
  std::size_t column(std::string_view name) const;
};

/// Parses simple comma-separated text (no quoting). Every row must have as
/// many fields as the header, otherwise FormatError names the offending line.
Table parse(std::string_view text);
Table read(const std::filesystem::path& path);

double parse_double(std::string_view field);

}  // namespace ievlab::csv
