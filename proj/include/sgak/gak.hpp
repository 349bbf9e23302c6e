#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sgak/core.hpp"

namespace sgak {

inline constexpr std::size_t kMaxEnumerationLength = 7;

// A monotone alignment between sequences of lengths n and m, stored as
// 1-based (i, j) pairs from (1, 1) to (n, m).
struct AlignmentPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  bool is_valid(std::size_t n, std::size_t m) const;
  friend bool operator==(const AlignmentPath&, const AlignmentPath&) = default;
};

// (n+1) x (m+1) sum-product table; row/column 0 hold the boundary.
struct DpTable {
  Eigen::MatrixXd values;
};

// n x m matrix of triple distances between the slices of x and y.
Eigen::MatrixXd distance_matrix(const InterleavedSequence& x, const InterleavedSequence& y,
                                KernelMode mode);

DpTable gak_table(const InterleavedSequence& x, const InterleavedSequence& y,
                  const KernelConfig& cfg);

// Global alignment kernel by dynamic programming. Returns the raw sum over
// all alignments, or K(x,y) / sqrt(K(x,x) K(y,y)) when cfg.normalize_gak.
double gak_forward(const InterleavedSequence& x, const InterleavedSequence& y,
                   const KernelConfig& cfg);

// Literal sum over enumerate_alignments(n, m). Correctness oracle for
// gak_forward; honours cfg.normalize_gak the same way.
double gak_bruteforce(const InterleavedSequence& x, const InterleavedSequence& y,
                      const KernelConfig& cfg);

std::vector<AlignmentPath> enumerate_alignments(std::size_t n, std::size_t m);

// Sum of triple distances along the path.
double alignment_score(const AlignmentPath& path, const InterleavedSequence& x,
                       const InterleavedSequence& y, KernelMode mode = KernelMode::Triple);

// Closed form of the kernel for two one-slice sequences with cosine `cos`.
double single_slice_gak(double cos, double delta);

// Mean of the local kernel over all n*m slice pairs (the "no alignment"
// baseline).
double mean_pairwise_similarity(const InterleavedSequence& x, const InterleavedSequence& y,
                                const KernelConfig& cfg);

// Max-product alignment, for display only. Ties prefer the diagonal step,
// then advancing x ("down"), then advancing y ("right").
AlignmentPath best_alignment(const InterleavedSequence& x, const InterleavedSequence& y,
                             const KernelConfig& cfg);

namespace detail {

struct DpFaults {
  // Sets M[1][0] = 1 instead of 0. Only used to prove the self-test catches
  // a broken boundary.
  bool boundary_flip = false;
};

DpTable gak_table_with(const InterleavedSequence& x, const InterleavedSequence& y,
                       const KernelConfig& cfg, const DpFaults& faults);
double gak_forward_with(const InterleavedSequence& x, const InterleavedSequence& y,
                        const KernelConfig& cfg, const DpFaults& faults);

}  // namespace detail

}  // namespace sgak
