#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace adce {

struct Column {
  std::string name;
  std::string unit;
  std::vector<double> values;
};

/// Sampled observables on a shared, increasing time grid.
struct TimeSeries {
  std::vector<double> times;  // units of 1/omega0
  std::vector<Column> columns;
  std::map<std::string, std::string> metadata;

  /// Appends a zero-filled column sized to the time grid and returns it.
  Column& add_column(std::string name, std::string unit) {
    columns.push_back({std::move(name), std::move(unit), std::vector<double>(times.size(), 0.0)});
    return columns.back();
  }
  const Column* find(const std::string& name) const {
    for (const auto& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
  Column* find(const std::string& name) {
    for (auto& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

}  // namespace adce
