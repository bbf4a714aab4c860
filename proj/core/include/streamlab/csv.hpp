#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace streamlab {

// 12 significant digits, '.' decimal separator.
std::string format_number(double v);

using CsvCell = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

template <class T>
CsvCell optional_cell(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  return CsvCell(*v);
}

class CsvWriter {
 public:
  // Writes the provenance comment line.
  CsvWriter(std::ostream& out, const std::string& invocation);

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<CsvCell>& cells);

 private:
  std::ostream& out_;
};

}  // namespace streamlab
