#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ccsim {

/// Minimal reader for the unquoted comma-separated files this project emits.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws SchemaError naming the column when absent.
  std::size_t column(std::string_view name) const;
};

std::vector<std::string> split_csv_line(std::string_view line);

/// Reads a whole table. When `required` is non-empty every listed column must
/// be present in the header. Rows with a wrong field count are rejected.
CsvTable read_csv(std::istream& in, const std::vector<std::string>& required = {});
CsvTable read_csv_file(const std::string& path, const std::vector<std::string>& required = {});

/// Fixed-point rendering with `decimals` places ("%.*f"), "-0.00" folded to "0.00".
std::string format_fixed(double value, int decimals);

}  // namespace ccsim
