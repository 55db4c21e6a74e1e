#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bcs/signal_model.hpp"

namespace bcs {

enum class RecoveryStatus { found, infeasible };

struct RecoveryOutcome {
  RecoveryStatus status = RecoveryStatus::infeasible;
  std::vector<std::uint8_t> z;  // length n when found, empty otherwise
  std::uint64_t nodes_explored = 0;
};

// True iff z has exactly k ones and reproduces u: for every row i,
// sum_j A_ij z_j is positive where u_i = +1 and nonpositive where u_i = -1.
bool check_feasible(const SensingMatrix& A, const BinaryObservation& u,
                    const std::vector<std::uint8_t>& z, std::size_t k);

// Scans supports of size k in lexicographic order and returns the first
// feasible one. Refuses instances with more than 1e7 supports.
RecoveryOutcome recover_exhaustive(const SensingMatrix& A,
                                   const BinaryObservation& u, std::size_t k);

struct BnbOptions {
  // Per-row bound pruning; disabling it degrades the search to plain
  // enumeration over the same tree.
  bool row_pruning = true;
};

// Depth-first search over include/exclude decisions, visiting variables in
// order of decreasing column influence. Candidate leaves are verified with
// check_feasible before being returned.
RecoveryOutcome recover_bnb(const SensingMatrix& A, const BinaryObservation& u,
                            std::size_t k, const BnbOptions& opts = {});

}  // namespace bcs
