#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lanlab::harness {

/// Shortest-form-free rendering with 17 significant digits, '.' decimal
/// point, independent of the global locale. nan / inf spelled as such.
std::string format_number(double v);

/// RFC 4180 field quoting.
std::string quote_field(std::string_view field);

/// Row-by-row CSV writer with CRLF line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(std::size_t v);
  /// Terminates the current row; throws if the column count is wrong.
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Index of a header column; throws if missing.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(std::istream& in);

}  // namespace lanlab::harness
