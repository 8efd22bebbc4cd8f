#pragma once

#include <string>
#include <vector>

namespace hyperlq {

/// 17 significant digits, enough to round-trip a double.
std::string FormatDouble(double x);

/// Header row followed by one row per index; all columns must have equal length.
std::string CsvString(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

void WriteCsv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& columns);

}  // namespace hyperlq
