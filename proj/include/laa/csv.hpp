#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace laa {

/// Comma-separated table with a header row. Quoted fields are supported;
/// `lines` keeps the 1-based source line of every row for error messages.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  std::optional<std::size_t> column(const std::string& name) const;
  std::size_t require_column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Shortest round-trippable form is overkill for reports; 12 significant digits.
std::string fmt(double v, int digits = 12);

std::string csv_row(const std::vector<std::string>& fields);

/// Parses a double, throwing ParseError that names `what` on failure.
double parse_double(const std::string& s, const std::string& what);

}  // namespace laa
