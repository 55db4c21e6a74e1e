#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace bcs {

// Derives an independent stream seed from a base seed and an index.
// Pure function of (base, index); distinct indices give distinct streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

std::mt19937_64 make_stream(std::uint64_t seed);

// Fixed purpose tags so each consumer of randomness gets its own stream.
namespace seed_tag {
inline constexpr std::uint64_t matrix = 1;
inline constexpr std::uint64_t init = 2;
inline constexpr std::uint64_t data = 3;
inline constexpr std::uint64_t probe = 4;
inline constexpr std::uint64_t eval = 5;
inline constexpr std::uint64_t timing = 6;
inline constexpr std::uint64_t cell = 7;
inline constexpr std::uint64_t component = 8;
}  // namespace seed_tag

// Binary vector with exactly k ones, stored as a sorted support.
class SparseSignal {
 public:
  SparseSignal(std::size_t n, std::vector<std::int32_t> support);

  std::size_t n() const { return n_; }
  std::size_t k() const { return support_.size(); }
  const std::vector<std::int32_t>& support() const { return support_; }
  std::vector<std::uint8_t> values() const;

  friend bool operator==(const SparseSignal&, const SparseSignal&) = default;

 private:
  std::size_t n_;
  std::vector<std::int32_t> support_;
};

// Row-major m x n measurement matrix.
class SensingMatrix {
 public:
  SensingMatrix(std::size_t rows, std::size_t cols,
                std::vector<double> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const double* row(std::size_t i) const { return entries_.data() + i * cols_; }
  const std::vector<double>& entries() const { return entries_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

// Vector of +-1 values, kept as doubles so it feeds the net directly.
class BinaryObservation {
 public:
  explicit BinaryObservation(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const double* data() const { return values_.data(); }

  friend bool operator==(const BinaryObservation&,
                         const BinaryObservation&) = default;

 private:
  std::vector<double> values_;
};

// -1 for a <= 0, +1 otherwise.
double sign(double a);

BinaryObservation observe(const SensingMatrix& A, const SparseSignal& x);
BinaryObservation observe(const SensingMatrix& A, const std::vector<double>& x);

// Uniform over supports of size k, 1 <= k < n.
SparseSignal sample_sparse_signal(std::size_t n, std::size_t k,
                                  std::mt19937_64& rng);
void sample_support(std::size_t n, std::size_t k, std::mt19937_64& rng,
                    std::vector<std::int32_t>& out);

// Entries drawn i.i.d. standard normal, filled row by row.
SensingMatrix sample_sensing_matrix(std::size_t m, std::size_t n,
                                    std::mt19937_64& rng);

}  // namespace bcs
