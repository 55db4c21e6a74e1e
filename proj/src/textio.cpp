#include "bcs/textio.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bcs {

SensingMatrix read_matrix_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<double> entries;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof())
      throw std::runtime_error(path + ": malformed number on line " +
                               std::to_string(rows + 1));
    if (row.empty()) continue;
    if (cols == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw std::runtime_error(path + ": ragged rows");
    }
    entries.insert(entries.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(path + ": empty matrix");
  return SensingMatrix(rows, cols, std::move(entries));
}

BinaryObservation read_observation_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw std::runtime_error(path + ": malformed number");
  if (values.empty()) throw std::runtime_error(path + ": empty observation");
  return BinaryObservation(std::move(values));
}

void write_estimate(std::ostream& out, const BinaryEstimate& est) {
  for (std::size_t j = 0; j < est.values.size(); ++j) {
    if (j) out << ' ';
    out << static_cast<int>(est.values[j]);
  }
  out << '\n';
}

}  // namespace bcs
