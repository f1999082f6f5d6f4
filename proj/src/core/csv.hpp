#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace bb {

using Cell = std::variant<double, std::string>;

/// Column-named table written as RFC-4180-style CSV: header row, LF line
/// endings, numbers with 12 significant digits, infinities as inf/-inf.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;
};

std::string format_number(double x);
std::string to_csv(const Table& t);
Table parse_csv(const std::string& text);

/// Mirrors the CSV as {"columns": [...], "rows": [[...], ...]}.
std::string to_json(const Table& t);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace bb
