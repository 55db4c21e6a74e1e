#include "bcs/signal_model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace bcs {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_stream(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

SparseSignal::SparseSignal(std::size_t n, std::vector<std::int32_t> support)
    : n_(n), support_(std::move(support)) {
  if (support_.empty() || support_.size() >= n_)
    throw std::invalid_argument("SparseSignal: require 1 <= k < n");
  if (!std::is_sorted(support_.begin(), support_.end()))
    std::sort(support_.begin(), support_.end());
  if (std::adjacent_find(support_.begin(), support_.end()) != support_.end())
    throw std::invalid_argument("SparseSignal: duplicate support index");
  if (support_.front() < 0 ||
      static_cast<std::size_t>(support_.back()) >= n_)
    throw std::invalid_argument("SparseSignal: support index out of range");
}

std::vector<std::uint8_t> SparseSignal::values() const {
  std::vector<std::uint8_t> v(n_, 0);
  for (std::int32_t j : support_) v[static_cast<std::size_t>(j)] = 1;
  return v;
}

SensingMatrix::SensingMatrix(std::size_t rows, std::size_t cols,
                             std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ == 0 || cols_ == 0)
    throw std::invalid_argument("SensingMatrix: zero dimension");
  if (entries_.size() != rows_ * cols_)
    throw std::invalid_argument("SensingMatrix: entry count mismatch");
}

BinaryObservation::BinaryObservation(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty())
    throw std::invalid_argument("BinaryObservation: empty vector");
  for (double v : values_)
    if (v != 1.0 && v != -1.0)
      throw std::invalid_argument("BinaryObservation: values must be +-1");
}

double sign(double a) { return a <= 0.0 ? -1.0 : 1.0; }

BinaryObservation observe(const SensingMatrix& A, const SparseSignal& x) {
  if (x.n() != A.cols())
    throw std::invalid_argument("observe: signal length mismatch");
  const std::size_t m = A.rows();
  std::vector<double> u(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = A.row(i);
    double s = 0.0;
    for (std::int32_t j : x.support()) s += row[static_cast<std::size_t>(j)];
    u[i] = sign(s);
  }
  return BinaryObservation(std::move(u));
}

BinaryObservation observe(const SensingMatrix& A,
                          const std::vector<double>& x) {
  if (x.size() != A.cols())
    throw std::invalid_argument("observe: signal length mismatch");
  const std::size_t m = A.rows();
  std::vector<double> u(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = A.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += row[j] * x[j];
    u[i] = sign(s);
  }
  return BinaryObservation(std::move(u));
}

void sample_support(std::size_t n, std::size_t k, std::mt19937_64& rng,
                    std::vector<std::int32_t>& out) {
  if (k == 0 || k >= n)
    throw std::invalid_argument("sample_support: require 1 <= k < n");
  thread_local std::vector<std::int32_t> idx;
  idx.resize(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  out.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
}

SparseSignal sample_sparse_signal(std::size_t n, std::size_t k,
                                  std::mt19937_64& rng) {
  std::vector<std::int32_t> support;
  sample_support(n, k, rng, support);
  return SparseSignal(n, std::move(support));
}

SensingMatrix sample_sensing_matrix(std::size_t m, std::size_t n,
                                    std::mt19937_64& rng) {
  if (m == 0 || n == 0)
    throw std::invalid_argument("sample_sensing_matrix: zero dimension");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> entries(m * n);
  for (double& e : entries) e = gauss(rng);
  return SensingMatrix(m, n, std::move(entries));
}

}  // namespace bcs
