#pragma once

// Comma-separated tables with `name[unit]` headers and shortest round-trip
// float formatting, so identical data always produces identical bytes.

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "adce/timeseries.hpp"

namespace adce {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

using Cell = std::variant<double, long long, std::string, bool>;

struct TableColumn {
  std::string name;
  std::string unit;  // "1" for dimensionless, "-" for labels and flags
};

class Table {
 public:
  Table() = default;
  explicit Table(std::vector<TableColumn> columns) : columns_(std::move(columns)) {}

  const std::vector<TableColumn>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  /// Throws InvalidArgument if the row width differs from the header.
  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;
  double number(std::size_t row, const std::string& column) const;

 private:
  std::vector<TableColumn> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_cell(const Cell& cell);
void write_csv(const Table& table, std::ostream& out);
std::string to_csv(const Table& table);

/// Time grid in units of 1/omega0 (and optionally 1/G_{0,0}) followed by the
/// series columns.
Table to_table(const TimeSeries& series, double g00 = 0.0);

}  // namespace adce
