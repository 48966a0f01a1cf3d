#pragma once

#include <string>

#include "adce/experiments.hpp"

namespace adce {

/// Gnuplot script plotting the bundle's CSV files, which are expected next to
/// the script as <prefix>_<table>.csv. Output goes to <prefix>.png.
std::string gnuplot_script(const ResultBundle& bundle, const std::string& prefix);

}  // namespace adce
