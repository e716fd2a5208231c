#include "lanlab/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace lanlab::harness {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string quote_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << quote_field(header[i]);
  }
  out_ << "\r\n";
}

CsvWriter& CsvWriter::field(std::string_view text) {
  if (in_row_ >= columns_) throw std::logic_error("csv: too many fields in row");
  if (in_row_) out_ << ',';
  out_ << quote_field(text);
  ++in_row_;
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(std::string_view(format_number(v))); }
CsvWriter& CsvWriter::field(long long v) { return field(std::string_view(std::to_string(v))); }
CsvWriter& CsvWriter::field(std::size_t v) { return field(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("csv: row has the wrong number of fields");
  out_ << "\r\n";
  in_row_ = 0;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error("csv: missing column '" + std::string(name) + "'");
}

CsvTable read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted field");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  CsvTable table;
  if (records.empty()) throw std::runtime_error("csv: empty input");
  table.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != table.header.size()) {
      throw std::runtime_error("csv: row " + std::to_string(i) + " has the wrong field count");
    }
    table.rows.push_back(std::move(records[i]));
  }
  return table;
}

}  // namespace lanlab::harness
