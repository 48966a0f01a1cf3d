#include "adce/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "adce/error.hpp"

namespace adce {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return std::signbit(value) ? "-0" : "0";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw InvalidArgument("row has " + std::to_string(row.size()) + " cells, table has " +
                          std::to_string(columns_.size()) + " columns");
  }
  rows_.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  throw InvalidArgument("no column named " + name);
}

double Table::number(std::size_t row, const std::string& column) const {
  const Cell& c = rows_.at(row).at(column_index(column));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? 1.0 : 0.0;
  throw InvalidArgument("column " + column + " is not numeric");
}

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "1" : "0"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string quoted = "\"";
      for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
      }
      return quoted + "\"";
    }
  };
  return std::visit(Visitor{}, cell);
}

void write_csv(const Table& table, std::ostream& out) {
  const auto& cols = table.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << format_cell(Cell{cols[i].name + "[" + cols[i].unit + "]"});
  }
  out << '\n';
  for (const auto& row : table.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_cell(row[i]);
    }
    out << '\n';
  }
}

std::string to_csv(const Table& table) {
  std::ostringstream out;
  write_csv(table, out);
  return out.str();
}

Table to_table(const TimeSeries& series, double g00) {
  std::vector<TableColumn> cols{{"t", "1/omega0"}};
  if (g00 > 0.0) cols.push_back({"t_g", "1/G00"});
  for (const auto& c : series.columns) cols.push_back({c.name, c.unit});
  Table table(std::move(cols));
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    std::vector<Cell> row{series.times[k]};
    if (g00 > 0.0) row.emplace_back(series.times[k] * g00);
    for (const auto& c : series.columns) row.emplace_back(c.values.at(k));
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace adce
