#include "ccsim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <istream>

#include "ccsim/domain.hpp"

namespace ccsim {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw SchemaError("missing CSV column '" + std::string(name) + "'");
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

CsvTable read_csv(std::istream& in, const std::vector<std::string>& required) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty CSV input (no header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split_csv_line(line);
  for (const auto& name : required) table.column(name);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw SchemaError("CSV line " + std::to_string(line_no) + ": expected " +
                        std::to_string(table.header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path, const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return read_csv(in, required);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string text(buf);
  if (text.starts_with('-') && text.find_first_not_of("-0.") == std::string::npos) text.erase(0, 1);
  return text;
}

}  // namespace ccsim
