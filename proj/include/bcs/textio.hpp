#pragma once

#include <iosfwd>
#include <string>

#include "bcs/neuralnet.hpp"
#include "bcs/signal_model.hpp"

namespace bcs {

// Text matrix: one row per line, entries separated by whitespace, every row
// the same length. Blank lines are skipped.
SensingMatrix read_matrix_text(const std::string& path);

// Whitespace-separated +-1 values, any line layout.
BinaryObservation read_observation_text(const std::string& path);

// Single line of space-separated 0/1 values.
void write_estimate(std::ostream& out, const BinaryEstimate& est);

}  // namespace bcs
