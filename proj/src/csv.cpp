#include "hyperlq/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "hyperlq/errors.hpp"

namespace hyperlq {

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string CsvString(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw DimensionError("CSV header and columns differ");
  const size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw DimensionError("CSV columns differ in length");
  std::string out;
  for (size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += '\n';
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < columns.size(); ++j) {
      if (j) out += ',';
      out += FormatDouble(columns[j][i]);
    }
    out += '\n';
  }
  return out;
}

void WriteCsv(const std::string& path, const std::vector<std::string>& header,
              const std::vector<std::vector<double>>& columns) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << CsvString(header, columns);
}

}  // namespace hyperlq
