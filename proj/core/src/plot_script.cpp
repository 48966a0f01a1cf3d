#include "adce/plot_script.hpp"

#include <algorithm>
#include <sstream>
#include <variant>

namespace adce {

namespace {

void header(std::ostringstream& out, const std::string& prefix, const std::string& title) {
  out << "# gnuplot " << prefix << ".gp\n"
      << "set datafile separator ','\n"
      << "set key autotitle columnhead outside right\n"
      << "set terminal pngcairo size 1200,800\n"
      << "set output '" << prefix << ".png'\n"
      << "set title '" << title << "'\n"
      << "set grid\n";
}

// One line per curve of a long-format curve table, filtered by the "curve" column.
void curves(std::ostringstream& out, const ResultBundle& bundle, const std::string& prefix, const std::string& x,
            const std::string& y, bool log_y) {
  const Table& t = bundle.table("curves");
  const std::size_t curve_col = t.column_index("curve");
  std::vector<std::string> names;
  for (const auto& row : t.rows()) {
    const std::string& c = std::get<std::string>(row[curve_col]);
    if (std::find(names.begin(), names.end(), c) == names.end()) names.push_back(c);
  }
  if (log_y) out << "set logscale y\n";
  out << "set xlabel '" << x << "'\nset ylabel '" << y << "'\n";
  out << "file = '" << prefix << "_curves.csv'\n";
  out << "plot \\\n";
  const std::size_t xi = t.column_index(x) + 1;
  const std::size_t yi = t.column_index(y) + 1;
  const std::size_t ci = curve_col + 1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << "  file using " << xi << ":(strcol(" << ci << ") eq '" << names[i] << "' ? $" << yi
        << " : 1/0) with lines title '" << names[i] << "'" << (i + 1 < names.size() ? ", \\\n" : "\n");
  }
}

void series(std::ostringstream& out, const ResultBundle& bundle, const std::string& prefix) {
  std::vector<std::string> tables;
  for (const char* name : {"exact", "effective"}) {
    if (bundle.has_table(name)) tables.push_back(name);
  }
  if (tables.empty()) return;
  out << "set xlabel 't [1/G00]'\nset ylabel 'population'\n";
  out << "plot \\\n";
  bool first = true;
  for (const auto& name : tables) {
    const Table& t = bundle.table(name);
    const std::size_t tg = t.column_index("t_g") + 1;
    for (std::size_t c = 0; c < t.columns().size(); ++c) {
      const std::string& col = t.columns()[c].name;
      if (col.rfind("P(", 0) != 0 && col != "n_tot") continue;
      if (!first) out << ", \\\n";
      first = false;
      out << "  '" << prefix << "_" << name << ".csv' using " << tg << ":" << c + 1 << " with lines"
          << (name == "effective" ? " dashtype 2" : "") << " title '" << name << " " << col << "'";
    }
  }
  out << "\n";
}

}  // namespace

std::string gnuplot_script(const ResultBundle& bundle, const std::string& prefix) {
  std::ostringstream out;
  const Scenario s = bundle.config.scenario;
  header(out, prefix, std::string(to_string(s)));
  switch (s) {
    case Scenario::Fig1: curves(out, bundle, prefix, "abs_delta1_g", "P", false); break;
    case Scenario::Fig2a:
    case Scenario::Fig2b: curves(out, bundle, prefix, "delta1_g", "half_transfer_time", true); break;
    case Scenario::Sweep: {
      const Table& t = bundle.table("sweep");
      out << "set xlabel '" << t.columns()[0].name << "'\nset ylabel 'theta_abs'\n"
          << "plot '" << prefix << "_sweep.csv' using 1:" << t.column_index("theta_abs") + 1 << " with points\n";
      break;
    }
    case Scenario::Rates:
    case Scenario::Dressed:
      out << "# tabular scenario, nothing to plot\n";
      break;
    default: series(out, bundle, prefix); break;
  }
  return out.str();
}

}  // namespace adce
