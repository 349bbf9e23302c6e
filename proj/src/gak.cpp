#include "sgak/gak.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "sgak/error.hpp"
#include "sgak/kernel.hpp"

namespace sgak {

bool AlignmentPath::is_valid(std::size_t n, std::size_t m) const {
  if (pairs.empty()) return false;
  if (pairs.front() != std::pair<std::size_t, std::size_t>{1, 1}) return false;
  if (pairs.back() != std::pair<std::size_t, std::size_t>{n, m}) return false;
  for (std::size_t t = 0; t + 1 < pairs.size(); ++t) {
    const auto [i0, j0] = pairs[t];
    const auto [i1, j1] = pairs[t + 1];
    if (i1 < i0 || j1 < j0) return false;
    if (i1 > i0 + 1 || j1 > j0 + 1) return false;
    if (i1 == i0 && j1 == j0) return false;
  }
  return true;
}

namespace {

void require_non_empty(const InterleavedSequence& x, const InterleavedSequence& y) {
  if (x.slices.empty() || y.slices.empty()) {
    throw Error(ErrorCode::kEmptySequence,
                fmt::format("empty sequence ('{}' has {}, '{}' has {} slices)", x.doc_id, x.size(),
                            y.doc_id, y.size()));
  }
}

void require_within_cap(std::size_t n, std::size_t m, std::size_t cap) {
  if (n * m > cap) {
    throw Error(ErrorCode::kSequenceTooLong,
                fmt::format("{}x{} = {} cells exceeds cap {}", n, m, n * m, cap));
  }
}

void require_enumerable(std::size_t n, std::size_t m) {
  if (n < 1 || m < 1) throw Error(ErrorCode::kEmptySequence, "alignment of an empty sequence");
  if (n > kMaxEnumerationLength || m > kMaxEnumerationLength) {
    throw Error(ErrorCode::kTooLargeForEnumeration,
                fmt::format("{}x{} exceeds enumeration limit {}", n, m, kMaxEnumerationLength));
  }
}

Eigen::MatrixXd kernel_matrix(const InterleavedSequence& x, const InterleavedSequence& y,
                              const KernelConfig& cfg) {
  const double s = sigma(x.size(), y.size(), cfg.delta);
  Eigen::MatrixXd k = distance_matrix(x, y, cfg.kernel_mode);
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) k(i, j) = local_kernel_from_distance(k(i, j), s);
  }
  return k;
}

double raw_gak(const InterleavedSequence& x, const InterleavedSequence& y, const KernelConfig& cfg,
               const detail::DpFaults& faults) {
  const double value = detail::gak_table_with(x, y, cfg, faults).values(
      static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
  if (value > 1.0) {
    spdlog::debug("raw GAK('{}', '{}') = {} exceeds 1", x.doc_id, y.doc_id, value);
  }
  return value;
}

double raw_bruteforce(const InterleavedSequence& x, const InterleavedSequence& y,
                      const KernelConfig& cfg) {
  require_non_empty(x, y);
  require_enumerable(x.size(), y.size());
  check_compatible(x, y);
  const double s = sigma(x.size(), y.size(), cfg.delta);
  double total = 0.0;
  for (const auto& path : enumerate_alignments(x.size(), y.size())) {
    double product = 1.0;
    for (const auto& [i, j] : path.pairs) {
      product *= local_kernel(x.slices[i - 1], y.slices[j - 1], s, cfg.kernel_mode);
    }
    total += product;
  }
  return total;
}

}  // namespace

Eigen::MatrixXd distance_matrix(const InterleavedSequence& x, const InterleavedSequence& y,
                                KernelMode mode) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          triple_distance(x.slices[i], y.slices[j], mode);
    }
  }
  return d;
}

namespace detail {

DpTable gak_table_with(const InterleavedSequence& x, const InterleavedSequence& y,
                       const KernelConfig& cfg, const DpFaults& faults) {
  cfg.validate();
  require_non_empty(x, y);
  require_within_cap(x.size(), y.size(), cfg.cell_cap);
  check_compatible(x, y);

  const Eigen::MatrixXd k = kernel_matrix(x, y, cfg);
  const auto n = k.rows();
  const auto m = k.cols();
  DpTable table{Eigen::MatrixXd::Zero(n + 1, m + 1)};
  auto& dp = table.values;
  dp(0, 0) = 1.0;
  if (faults.boundary_flip) dp(1, 0) = 1.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    for (Eigen::Index j = 1; j <= m; ++j) {
      dp(i, j) = (dp(i, j - 1) + dp(i - 1, j - 1) + dp(i - 1, j)) * k(i - 1, j - 1);
    }
  }
  return table;
}

double gak_forward_with(const InterleavedSequence& x, const InterleavedSequence& y,
                        const KernelConfig& cfg, const DpFaults& faults) {
  const double xy = raw_gak(x, y, cfg, faults);
  if (!cfg.normalize_gak) return xy;
  const double xx = raw_gak(x, x, cfg, faults);
  const double yy = raw_gak(y, y, cfg, faults);
  return xy / std::sqrt(xx * yy);
}

}  // namespace detail

DpTable gak_table(const InterleavedSequence& x, const InterleavedSequence& y,
                  const KernelConfig& cfg) {
  return detail::gak_table_with(x, y, cfg, {});
}

double gak_forward(const InterleavedSequence& x, const InterleavedSequence& y,
                   const KernelConfig& cfg) {
  return detail::gak_forward_with(x, y, cfg, {});
}

double gak_bruteforce(const InterleavedSequence& x, const InterleavedSequence& y,
                      const KernelConfig& cfg) {
  cfg.validate();
  const double xy = raw_bruteforce(x, y, cfg);
  if (!cfg.normalize_gak) return xy;
  return xy / std::sqrt(raw_bruteforce(x, x, cfg) * raw_bruteforce(y, y, cfg));
}

std::vector<AlignmentPath> enumerate_alignments(std::size_t n, std::size_t m) {
  require_enumerable(n, m);
  std::vector<AlignmentPath> out;
  AlignmentPath current;
  current.pairs.emplace_back(1, 1);
  std::function<void(std::size_t, std::size_t)> extend = [&](std::size_t i, std::size_t j) {
    if (i == n && j == m) {
      out.push_back(current);
      return;
    }
    constexpr std::pair<std::size_t, std::size_t> kSteps[] = {{1, 0}, {0, 1}, {1, 1}};
    for (const auto& [di, dj] : kSteps) {
      if (i + di > n || j + dj > m) continue;
      current.pairs.emplace_back(i + di, j + dj);
      extend(i + di, j + dj);
      current.pairs.pop_back();
    }
  };
  extend(1, 1);
  return out;
}

double alignment_score(const AlignmentPath& path, const InterleavedSequence& x,
                       const InterleavedSequence& y, KernelMode mode) {
  if (!path.is_valid(x.size(), y.size())) {
    throw Error(ErrorCode::kPathShapeMismatch,
                fmt::format("path is not a valid alignment for {}x{}", x.size(), y.size()));
  }
  double score = 0.0;
  for (const auto& [i, j] : path.pairs) {
    score += triple_distance(x.slices[i - 1], y.slices[j - 1], mode);
  }
  return score;
}

double single_slice_gak(double cos, double delta) {
  if (!(cos >= -1.0 && cos <= 1.0)) {
    throw Error(ErrorCode::kCosineOutOfRange, fmt::format("cosine {} outside [-1, 1]", cos));
  }
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDelta, fmt::format("delta must be > 0, got {}", delta));
  }
  const double t = (1.0 - cos) / (delta * delta);
  const double s = std::exp(-t);
  return s / (2.0 - s);
}

double mean_pairwise_similarity(const InterleavedSequence& x, const InterleavedSequence& y,
                                const KernelConfig& cfg) {
  cfg.validate();
  require_non_empty(x, y);
  check_compatible(x, y);
  return kernel_matrix(x, y, cfg).mean();
}

AlignmentPath best_alignment(const InterleavedSequence& x, const InterleavedSequence& y,
                             const KernelConfig& cfg) {
  cfg.validate();
  require_non_empty(x, y);
  require_within_cap(x.size(), y.size(), cfg.cell_cap);
  check_compatible(x, y);
  const Eigen::MatrixXd k = kernel_matrix(x, y, cfg);
  const auto n = k.rows();
  const auto m = k.cols();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  // Log domain; the kernel is strictly positive.
  Eigen::MatrixXd best = Eigen::MatrixXd::Constant(n + 1, m + 1, kNegInf);
  best(0, 0) = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double prev = std::max({best(i - 1, j - 1), best(i - 1, j), best(i, j - 1)});
      best(i, j) = prev + std::log(k(i - 1, j - 1));
    }
  }
  AlignmentPath path;
  Eigen::Index i = n;
  Eigen::Index j = m;
  path.pairs.emplace_back(i, j);
  while (i != 1 || j != 1) {
    const double diag = best(i - 1, j - 1);
    const double down = best(i - 1, j);
    const double right = best(i, j - 1);
    if (diag >= down && diag >= right) {
      --i;
      --j;
    } else if (down >= right) {
      --i;
    } else {
      --j;
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

}  // namespace sgak
