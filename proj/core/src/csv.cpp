#include "streamlab/csv.hpp"

#include <fmt/format.h>

namespace streamlab {

std::string format_number(double v) { return fmt::format("{:.12g}", v); }

CsvWriter::CsvWriter(std::ostream& out, const std::string& invocation) : out_(out) {
  out_ << "# streamlab " << STREAMLAB_VERSION << " | " << invocation << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            out_ << format_number(v);
          } else if constexpr (std::is_same_v<T, std::int64_t>) {
            out_ << v;
          } else if constexpr (std::is_same_v<T, bool>) {
            out_ << (v ? "true" : "false");
          } else if constexpr (std::is_same_v<T, std::string>) {
            if (v.find_first_of(",\"") == std::string::npos) {
              out_ << v;
            } else {
              out_ << '"';
              for (char ch : v) out_ << (ch == '"' ? "\"\"" : std::string(1, ch));
              out_ << '"';
            }
          }
        },
        cells[i]);
  }
  out_ << '\n';
}

}  // namespace streamlab
