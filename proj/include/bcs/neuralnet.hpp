#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "bcs/kernels.hpp"
#include "bcs/signal_model.hpp"

namespace bcs {

struct NetDims {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t alpha = 0;

  friend bool operator==(const NetDims&, const NetDims&) = default;
};

// Weights of the two-layer sigmoid net. Matrices are row-major with shape
// (output dim x input dim): w_h is alpha x m, w_o is n x alpha.
struct NetParams {
  NetDims dims;
  std::uint64_t seed = 0;
  std::vector<double> w_h;
  std::vector<double> b_h;
  std::vector<double> w_o;
  std::vector<double> b_o;

  friend bool operator==(const NetParams&, const NetParams&) = default;
};

struct SoftOutput {
  std::vector<double> values;  // each strictly inside (0, 1)
};

struct BinaryEstimate {
  std::vector<std::uint8_t> values;

  friend bool operator==(const BinaryEstimate&,
                         const BinaryEstimate&) = default;
};

// Numerically stable logistic function. Output is clamped to the open
// interval (0, 1): never exactly 0 or 1 even for extreme inputs.
double sigmoid(double a);
std::vector<double> sigmoid(std::vector<double> a);

// Weights i.i.d. normal with variance 0.05 (w_h first, then w_o, row by
// row); biases zero.
NetParams init_params(std::size_t m, std::size_t n, std::size_t alpha,
                      std::mt19937_64& rng);

SoftOutput forward(const NetParams& p, const BinaryObservation& u,
                   kernel::OpCount* ops = nullptr);

// Coordinatewise rounding; 0.5 rounds up to 1.
BinaryEstimate round_output(const SoftOutput& y);

void write_model(std::ostream& out, const NetParams& p);
NetParams read_model(std::istream& in);
void save_model(const NetParams& p, const std::string& path);
NetParams load_model(const std::string& path);

}  // namespace bcs
