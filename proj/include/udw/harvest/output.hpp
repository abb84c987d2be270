#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "udw/harvest/run.hpp"

namespace udw::harvest {

const std::vector<std::string>& csv_columns();

// Header plus one line per row; absent values are empty cells and numbers
// are printed with 17 significant digits.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

// Same columns as objects {"value": v, "error": e} or {"value": v, "error": "exact"};
// absent values are null.
void write_json(std::ostream& out, const std::vector<ResultRow>& rows, const std::string& units);

}  // namespace udw::harvest
