#include "bcs/optimal_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bcs {

namespace {

// Bound comparisons back off by this margin so floating-point rounding can
// only weaken pruning, never cut off a feasible branch. Candidate leaves are
// re-verified exactly.
constexpr double bound_slack = 1e-9;

void validate_instance(const SensingMatrix& A, const BinaryObservation& u,
                       std::size_t k, const char* who) {
  if (u.size() != A.rows())
    throw std::invalid_argument(std::string(who) +
                                ": observation length mismatch");
  if (k == 0 || k >= A.cols())
    throw std::invalid_argument(std::string(who) + ": require 1 <= k < n");
}

double binomial(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

}  // namespace

bool check_feasible(const SensingMatrix& A, const BinaryObservation& u,
                    const std::vector<std::uint8_t>& z, std::size_t k) {
  if (z.size() != A.cols())
    throw std::invalid_argument("check_feasible: candidate length mismatch");
  if (u.size() != A.rows())
    throw std::invalid_argument("check_feasible: observation length mismatch");
  std::size_t weight = 0;
  for (std::uint8_t v : z) {
    if (v > 1)
      throw std::invalid_argument("check_feasible: candidate must be 0/1");
    weight += v;
  }
  if (weight != k) return false;
  const auto& uv = u.values();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* row = A.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j)
      if (z[j]) s += row[j];
    if (uv[i] > 0.0 ? s <= 0.0 : s > 0.0) return false;
  }
  return true;
}

RecoveryOutcome recover_exhaustive(const SensingMatrix& A,
                                   const BinaryObservation& u, std::size_t k) {
  validate_instance(A, u, k, "recover_exhaustive");
  const std::size_t n = A.cols();
  const std::size_t m = A.rows();
  if (binomial(n, k) > 1e7)
    throw std::invalid_argument(
        "recover_exhaustive: more than 1e7 supports, use recover_bnb");

  // Transposed copy makes each candidate column a contiguous run.
  std::vector<double> At(n * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) At[j * m + i] = A.row(i)[j];

  const auto& uv = u.values();
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> sums(m);
  RecoveryOutcome out;
  while (true) {
    ++out.nodes_explored;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j : idx) {
      const double* col = At.data() + j * m;
      for (std::size_t i = 0; i < m; ++i) sums[i] += col[i];
    }
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i)
      ok = uv[i] > 0.0 ? sums[i] > 0.0 : sums[i] <= 0.0;
    if (ok) {
      out.status = RecoveryStatus::found;
      out.z.assign(n, 0);
      for (std::size_t j : idx) out.z[j] = 1;
      return out;
    }
    // next combination in lexicographic order
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

namespace {

class BnbSearch {
 public:
  BnbSearch(const SensingMatrix& A, const BinaryObservation& u, std::size_t k,
            const BnbOptions& opts)
      : A_(A), u_(u), k_(k), opts_(opts), n_(A.cols()), m_(A.rows()) {
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::vector<double> influence(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = A_.row(i);
      for (std::size_t j = 0; j < n_; ++j) influence[j] += std::fabs(row[j]);
    }
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::int32_t a, std::int32_t b) {
                       return influence[static_cast<std::size_t>(a)] >
                              influence[static_cast<std::size_t>(b)];
                     });
    cols_.resize(n_ * m_);
    for (std::size_t d = 0; d < n_; ++d) {
      const auto j = static_cast<std::size_t>(order_[d]);
      for (std::size_t i = 0; i < m_; ++i) cols_[d * m_ + i] = A_.row(i)[j];
    }
    build_bound_tables();
    sums_stack_.assign((k_ + 1) * m_, 0.0);
    picked_.reserve(k_);
  }

  RecoveryOutcome run() {
    RecoveryOutcome out;
    if (dfs(0, 0)) {
      out.status = RecoveryStatus::found;
      out.z = std::move(best_);
    }
    out.nodes_explored = nodes_;
    return out;
  }

 private:
  std::size_t table_at(std::size_t d, std::size_t r) const {
    return (d * (k_ + 1) + r) * m_;
  }

  // max_add_[(d,r)] row i holds the largest sum of r column-d.. entries of
  // row i; min_add_ the smallest. Sentinels cover r larger than the suffix.
  void build_bound_tables() {
    const double inf = std::numeric_limits<double>::infinity();
    max_add_.assign((n_ + 1) * (k_ + 1) * m_, 0.0);
    min_add_.assign((n_ + 1) * (k_ + 1) * m_, 0.0);
    for (std::size_t r = 1; r <= k_; ++r) {
      double* mx = max_add_.data() + table_at(n_, r);
      double* mn = min_add_.data() + table_at(n_, r);
      std::fill(mx, mx + m_, -inf);
      std::fill(mn, mn + m_, inf);
    }
    std::vector<double> top(m_ * k_), bot(m_ * k_);
    std::size_t cnt = 0;
    for (std::size_t d = n_; d-- > 0;) {
      const std::size_t grown = std::min(k_, n_ - d);
      for (std::size_t i = 0; i < m_; ++i) {
        const double v = cols_[d * m_ + i];
        insert_desc(top.data() + i * k_, cnt, v);
        insert_asc(bot.data() + i * k_, cnt, v);
      }
      cnt = grown;
      for (std::size_t i = 0; i < m_; ++i) {
        double acc_max = 0.0, acc_min = 0.0;
        for (std::size_t r = 1; r <= k_; ++r) {
          double* mx = max_add_.data() + table_at(d, r);
          double* mn = min_add_.data() + table_at(d, r);
          if (r <= cnt) {
            acc_max += top[i * k_ + r - 1];
            acc_min += bot[i * k_ + r - 1];
            mx[i] = acc_max;
            mn[i] = acc_min;
          } else {
            mx[i] = -inf;
            mn[i] = inf;
          }
        }
      }
    }
  }

  void insert_desc(double* arr, std::size_t cnt, double v) {
    std::size_t pos = std::min(cnt, k_ - 1);
    if (cnt < k_) {
      arr[pos] = v;
    } else if (v > arr[k_ - 1]) {
      arr[k_ - 1] = v;
      pos = k_ - 1;
    } else {
      return;
    }
    while (pos > 0 && arr[pos - 1] < arr[pos]) {
      std::swap(arr[pos - 1], arr[pos]);
      --pos;
    }
  }

  void insert_asc(double* arr, std::size_t cnt, double v) {
    std::size_t pos = std::min(cnt, k_ - 1);
    if (cnt < k_) {
      arr[pos] = v;
    } else if (v < arr[k_ - 1]) {
      arr[k_ - 1] = v;
      pos = k_ - 1;
    } else {
      return;
    }
    while (pos > 0 && arr[pos - 1] > arr[pos]) {
      std::swap(arr[pos - 1], arr[pos]);
      --pos;
    }
  }

  bool dfs(std::size_t d, std::size_t chosen) {
    ++nodes_;
    const std::size_t r = k_ - chosen;
    const double* sums = sums_stack_.data() + chosen * m_;
    if (r == 0) {
      std::vector<std::uint8_t> z(n_, 0);
      for (std::int32_t j : picked_) z[static_cast<std::size_t>(j)] = 1;
      if (check_feasible(A_, u_, z, k_)) {
        best_ = std::move(z);
        return true;
      }
      return false;
    }
    if (d == n_ || r > n_ - d) return false;
    if (opts_.row_pruning) {
      const double* mx = max_add_.data() + table_at(d, r);
      const double* mn = min_add_.data() + table_at(d, r);
      const auto& uv = u_.values();
      for (std::size_t i = 0; i < m_; ++i) {
        if (uv[i] > 0.0) {
          if (sums[i] + mx[i] <= -bound_slack) return false;
        } else {
          if (sums[i] + mn[i] > bound_slack) return false;
        }
      }
    }
    const double* col = cols_.data() + d * m_;
    double* child = sums_stack_.data() + (chosen + 1) * m_;
    for (std::size_t i = 0; i < m_; ++i) child[i] = sums[i] + col[i];
    picked_.push_back(order_[d]);
    if (dfs(d + 1, chosen + 1)) return true;
    picked_.pop_back();
    return dfs(d + 1, chosen);
  }

  const SensingMatrix& A_;
  const BinaryObservation& u_;
  std::size_t k_;
  BnbOptions opts_;
  std::size_t n_;
  std::size_t m_;
  std::vector<std::int32_t> order_;
  std::vector<double> cols_;
  std::vector<double> max_add_, min_add_;
  std::vector<double> sums_stack_;
  std::vector<std::int32_t> picked_;
  std::vector<std::uint8_t> best_;
  std::uint64_t nodes_ = 0;
};

}  // namespace

RecoveryOutcome recover_bnb(const SensingMatrix& A, const BinaryObservation& u,
                            std::size_t k, const BnbOptions& opts) {
  validate_instance(A, u, k, "recover_bnb");
  BnbSearch search(A, u, k, opts);
  return search.run();
}

}  // namespace bcs
