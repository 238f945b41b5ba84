#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace tonelex::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based file line of each data row (header is line 1).
  std::vector<std::size_t> line_numbers;
};

/// RFC-4180-ish reader: comma separated, double quotes may wrap a field and
/// are doubled to escape. UTF-8 passes through untouched. Throws
/// Error(missing_file) / Error(parse_error).
Table read_table(const std::filesystem::path& path);

/// Splits one line into fields (same quoting rules as read_table).
std::vector<std::string> parse_line(const std::string& line, std::size_t line_no);

std::string escape_field(const std::string& field);
std::string join_row(const std::vector<std::string>& fields);

}  // namespace tonelex::csv
