#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dcs {

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF, embedded newlines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line where each row starts

  /// Index of a header column; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

}  // namespace dcs
