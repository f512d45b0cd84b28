#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace bflab {

// Shortest round-trip formatting keeps checksums stable.
std::string fmt17(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  explicit CsvTable(std::vector<std::string> columns) : header(std::move(columns)) {}

  void add(const std::vector<double>& values);
  void add_cells(std::vector<std::string> cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
};

}  // namespace bflab
