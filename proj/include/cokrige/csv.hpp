#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cokrige::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it needs it.
std::string escape(std::string_view field);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;  // lines starting with '#', without the marker

  /// Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a header row followed by data rows. Blank lines are skipped.
Table read(std::istream& in);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);

/// "key = value" lines; '#' starts a comment, blank lines are skipped.
/// Order is preserved and later duplicates are kept.
std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in);

std::string trim(std::string_view text);

}  // namespace cokrige::csv
