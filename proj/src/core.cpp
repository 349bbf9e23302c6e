#include "sgak/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include <fmt/format.h>

#include "sgak/error.hpp"

namespace sgak {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kOutOfRangeCut: return "OutOfRangeCut";
    case ErrorCode::kDuplicateCut: return "DuplicateCut";
    case ErrorCode::kEmptyTokenList: return "EmptyTokenList";
    case ErrorCode::kDegenerateVector: return "DegenerateVector";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMixedFormPair: return "MixedFormPair";
    case ErrorCode::kNonPositiveDelta: return "NonPositiveDelta";
    case ErrorCode::kNonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kSequenceTooLong: return "SequenceTooLong";
    case ErrorCode::kTooLargeForEnumeration: return "TooLargeForEnumeration";
    case ErrorCode::kPathShapeMismatch: return "PathShapeMismatch";
    case ErrorCode::kCosineOutOfRange: return "CosineOutOfRange";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kDuplicateDocId: return "DuplicateDocId";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kMissingGoldId: return "MissingGoldId";
    case ErrorCode::kMalformedExample: return "MalformedExample";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kFormatError: return "FormatError";
  }
  return "Unknown";
}

std::string_view modality_name(Modality m) { return m == Modality::Image ? "image" : "text"; }

SliceEmbedding SliceEmbedding::composite(Modality modality, Vector specialist, Vector shared) {
  return SliceEmbedding(modality, SliceForm::Composite, std::move(specialist), std::move(shared));
}

SliceEmbedding SliceEmbedding::atomic(Modality modality, Vector whole) {
  return SliceEmbedding(modality, SliceForm::Atomic, std::move(whole), Vector());
}

SliceEmbedding SliceEmbedding::normalized_composite(Modality modality, const Vector& specialist,
                                                    const Vector& shared) {
  return composite(modality, normalized(specialist), normalized(shared));
}

SliceEmbedding SliceEmbedding::normalized_atomic(Modality modality, const Vector& whole) {
  return atomic(modality, normalized(whole));
}

Vector SliceEmbedding::flattened() const {
  Vector out(dim());
  out << first_, second_;
  return out;
}

SliceShape shape_of(const SliceEmbedding& s) {
  if (s.is_composite()) return {SliceForm::Composite, s.specialist().size(), s.shared().size()};
  return {SliceForm::Atomic, s.whole().size(), 0};
}

namespace {

void check_part(const Vector& v, std::string_view label, Eigen::Index offset,
                std::vector<Violation>& out) {
  bool finite = true;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      finite = false;
      out.push_back({ViolationKind::NonFinite,
                     fmt::format("non-finite value at index {}", offset + i)});
    }
  }
  if (v.size() == 0) {
    out.push_back({ViolationKind::ShapeMismatch,
                   fmt::format("{} vector is empty", label.empty() ? "whole" : label)});
    return;
  }
  if (!finite) return;
  const double deviation = std::abs(v.norm() - 1.0);
  if (deviation > kNormTolerance) {
    out.push_back({ViolationKind::NormDeviation,
                   label.empty() ? fmt::format("norm deviation {}", deviation)
                                 : fmt::format("{} norm deviation {}", label, deviation)});
  }
}

}  // namespace

ValidationReport validate_slice(const SliceEmbedding& s, std::optional<SliceShape> expected) {
  ValidationReport report;
  if (s.is_composite()) {
    check_part(s.specialist(), "specialist", 0, report.violations);
    check_part(s.shared(), "shared", s.specialist().size(), report.violations);
  } else {
    check_part(s.whole(), "", 0, report.violations);
  }
  if (expected && shape_of(s) != *expected) {
    const auto got = shape_of(s);
    report.violations.push_back(
        {ViolationKind::ShapeMismatch,
         fmt::format("shape mismatch: expected ({}, {}), got ({}, {})", expected->d1, expected->d2,
                     got.d1, got.d2)});
  }
  return report;
}

void check_uniform_shape(const InterleavedSequence& x) {
  if (x.slices.empty()) return;
  const auto first = shape_of(x.slices.front());
  for (std::size_t i = 1; i < x.slices.size(); ++i) {
    if (shape_of(x.slices[i]) != first) {
      throw Error(ErrorCode::kShapeMismatch,
                  fmt::format("sequence '{}' mixes embedding shapes at slice {}", x.doc_id, i));
    }
  }
}

void check_compatible(const InterleavedSequence& x, const InterleavedSequence& y) {
  check_uniform_shape(x);
  check_uniform_shape(y);
  if (!x.slices.empty() && !y.slices.empty() &&
      shape_of(x.slices.front()) != shape_of(y.slices.front())) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("sequences '{}' and '{}' have different embedding shapes", x.doc_id,
                            y.doc_id));
  }
}

std::vector<PrefixView> make_prefix_views(const InterleavedSequence& seq,
                                          std::span<const std::size_t> cuts) {
  std::unordered_set<std::size_t> seen;
  std::vector<PrefixView> views;
  views.reserve(cuts.size());
  for (std::size_t k : cuts) {
    if (k < 1 || k > seq.size()) {
      throw Error(ErrorCode::kOutOfRangeCut,
                  fmt::format("cut {} outside [1, {}] for '{}'", k, seq.size(), seq.doc_id));
    }
    if (!seen.insert(k).second) {
      throw Error(ErrorCode::kDuplicateCut, fmt::format("cut {} repeated", k));
    }
    views.push_back({seq.doc_id, k,
                     std::vector<SliceEmbedding>(seq.slices.begin(),
                                                 seq.slices.begin() + static_cast<long>(k))});
  }
  return views;
}

std::vector<std::size_t> sample_cuts(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (count > n) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("cannot draw {} distinct cuts from {} positions", count, n));
  }
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{1});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates with an explicit index draw, so the result does not
  // depend on the standard library's shuffle implementation.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

Vector normalized(const Vector& v) {
  const double norm = v.norm();
  if (!(norm >= kDegenerateNorm)) {
    throw Error(ErrorCode::kDegenerateVector, fmt::format("vector norm {} is degenerate", norm));
  }
  return v / norm;
}

Vector pool_representation(std::span<const Vector> tokens, PoolingPolicy policy) {
  if (tokens.empty()) throw Error(ErrorCode::kEmptyTokenList, "no tokens to pool");
  const auto dim = tokens.front().size();
  for (const auto& t : tokens) {
    if (t.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("token of dim {} among tokens of dim {}", t.size(), dim));
    }
  }
  if (policy == PoolingPolicy::LastToken) return normalized(tokens.back());
  Vector sum = Vector::Zero(dim);
  for (const auto& t : tokens) sum += t;
  return normalized(sum / static_cast<double>(tokens.size()));
}

void KernelConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kNonPositiveDelta, fmt::format("delta must be > 0, got {}", delta));
  }
  if (cell_cap == 0) throw Error(ErrorCode::kInvalidArgument, "cell_cap must be >= 1");
}

std::uint64_t fingerprint(const KernelConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
      h ^= (value >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(std::bit_cast<std::uint64_t>(cfg.delta));
  mix(cfg.normalize_gak ? 1 : 0);
  mix(static_cast<std::uint64_t>(cfg.label_single_slice_mode));
  mix(static_cast<std::uint64_t>(cfg.kernel_mode));
  mix(cfg.cell_cap);
  mix(cfg.raw_gak_labels ? 1 : 0);
  return h;
}

}  // namespace sgak
