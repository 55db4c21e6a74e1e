#pragma once

#include <unistd.h>

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace testutil {

inline bool rel_close(double a, double b, double tol) {
  const double diff = std::fabs(a - b);
  const double mag = std::max(std::fabs(a), std::fabs(b));
  return diff <= tol * mag;
}

// Removes one column from every row of a CSV string, so reruns of a
// benchmark can be compared with the wall-clock column ignored.
inline std::string drop_csv_column(const std::string& csv,
                                   std::size_t column) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == column) continue;
      out += fields[i];
      out += i + 1 == fields.size() ? '\n' : ',';
    }
  }
  return out;
}

// Unique path under the system temp dir; removed by the caller.
inline std::string temp_path(const std::string& stem) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path();
  return (dir / (stem + "." + std::to_string(getpid()) + "." +
                 std::to_string(counter++)))
      .string();
}

}  // namespace testutil
