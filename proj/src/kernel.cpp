#include "sgak/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "sgak/error.hpp"

namespace sgak {

namespace {

// Picks the pair of vectors the kernel compares for (a, b).
std::pair<const Vector*, const Vector*> select_parts(const SliceEmbedding& a,
                                                     const SliceEmbedding& b, KernelMode mode) {
  if (a.form() != b.form()) {
    throw Error(ErrorCode::kMixedFormPair, "cannot compare an atomic slice with a composite slice");
  }
  if (shape_of(a) != shape_of(b)) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("slice dims ({}, {}) vs ({}, {})", shape_of(a).d1, shape_of(a).d2,
                            shape_of(b).d1, shape_of(b).d2));
  }
  if (!a.is_composite()) return {&a.whole(), &b.whole()};
  if (mode == KernelMode::Triple && a.modality() == b.modality()) {
    return {&a.specialist(), &b.specialist()};
  }
  return {&a.shared(), &b.shared()};
}

}  // namespace

double triple_distance(const SliceEmbedding& a, const SliceEmbedding& b, KernelMode mode) {
  const auto [u, v] = select_parts(a, b, mode);
  return (*u - *v).squaredNorm();
}

double triple_cosine(const SliceEmbedding& a, const SliceEmbedding& b, KernelMode mode) {
  const auto [u, v] = select_parts(a, b, mode);
  const double denom = u->norm() * v->norm();
  if (!(denom > 0.0)) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  return std::clamp(u->dot(*v) / denom, -1.0, 1.0);
}

double sigma(std::size_t n, std::size_t m, double delta) {
  if (!(delta > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDelta, fmt::format("delta must be > 0, got {}", delta));
  }
  if (n < 1 || m < 1) throw Error(ErrorCode::kEmptySequence, "sigma needs n, m >= 1");
  return delta * std::sqrt(static_cast<double>(n + m) / 2.0);
}

double local_kernel_from_distance(double distance, double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kNonPositiveSigma, fmt::format("sigma must be > 0, got {}", sigma));
  }
  const double u = std::exp(-distance / (2.0 * sigma * sigma));
  return u / (2.0 - u);
}

double local_kernel(const SliceEmbedding& a, const SliceEmbedding& b, double sigma,
                    KernelMode mode) {
  return local_kernel_from_distance(triple_distance(a, b, mode), sigma);
}

}  // namespace sgak
