#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mefkit {

/// Minimal comma-separated table: one header row, string cells, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const CsvTable& table, const std::filesystem::path& path);

std::vector<std::string> split_fields(std::string_view line, char sep = ',');

}  // namespace mefkit
