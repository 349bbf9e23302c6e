#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sgak {

using Vector = Eigen::VectorXd;

inline constexpr double kNormTolerance = 1e-6;
inline constexpr double kDegenerateNorm = 1e-9;

enum class Modality { Image, Text };
enum class SliceForm { Atomic, Composite };

std::string_view modality_name(Modality m);

// One image or one sentence. Composite slices carry a modality-specialist
// sub-vector and a cross-modal shared sub-vector, each unit norm on its own;
// atomic slices carry a single unit vector.
class SliceEmbedding {
 public:
  static SliceEmbedding composite(Modality modality, Vector specialist, Vector shared);
  static SliceEmbedding atomic(Modality modality, Vector whole);

  // Same as above but unit-normalizes each part. Throws kDegenerateVector when
  // a part has norm below kDegenerateNorm.
  static SliceEmbedding normalized_composite(Modality modality, const Vector& specialist,
                                             const Vector& shared);
  static SliceEmbedding normalized_atomic(Modality modality, const Vector& whole);

  Modality modality() const { return modality_; }
  SliceForm form() const { return form_; }
  bool is_composite() const { return form_ == SliceForm::Composite; }

  // Valid only for the matching form.
  const Vector& specialist() const { return first_; }
  const Vector& shared() const { return second_; }
  const Vector& whole() const { return first_; }

  // Total dimension d (d1 + d2 for composite slices).
  Eigen::Index dim() const { return first_.size() + second_.size(); }
  // Concatenated vector; for composite slices concat(specialist, shared).
  Vector flattened() const;

 private:
  SliceEmbedding(Modality modality, SliceForm form, Vector first, Vector second)
      : modality_(modality), form_(form), first_(std::move(first)), second_(std::move(second)) {}

  Modality modality_;
  SliceForm form_;
  Vector first_;
  Vector second_;
};

struct SliceShape {
  SliceForm form = SliceForm::Atomic;
  Eigen::Index d1 = 0;  // specialist dim, or whole dim for atomic slices
  Eigen::Index d2 = 0;  // shared dim; 0 for atomic slices

  friend bool operator==(const SliceShape&, const SliceShape&) = default;
};

SliceShape shape_of(const SliceEmbedding& s);

enum class ViolationKind { NormDeviation, NonFinite, ShapeMismatch };

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Never throws; lists every violated invariant.
ValidationReport validate_slice(const SliceEmbedding& s,
                                std::optional<SliceShape> expected = std::nullopt);

struct InterleavedSequence {
  std::string doc_id;
  std::vector<SliceEmbedding> slices;

  std::size_t size() const { return slices.size(); }
};

// Throws kShapeMismatch when slices within or across the sequences do not
// share one embedding shape.
void check_compatible(const InterleavedSequence& x, const InterleavedSequence& y);
void check_uniform_shape(const InterleavedSequence& x);

struct PrefixView {
  std::string source_doc_id;
  std::size_t cut = 0;
  std::vector<SliceEmbedding> slices;

  InterleavedSequence as_sequence() const { return {source_doc_id, slices}; }
};

std::vector<PrefixView> make_prefix_views(const InterleavedSequence& seq,
                                          std::span<const std::size_t> cuts);

// Draws `count` distinct cuts uniformly from {1..n}, ascending.
std::vector<std::size_t> sample_cuts(std::size_t n, std::size_t count, std::uint64_t seed);

enum class PoolingPolicy { LastToken, AveragePool };

Vector pool_representation(std::span<const Vector> tokens, PoolingPolicy policy);

// Throws kDegenerateVector below kDegenerateNorm.
Vector normalized(const Vector& v);

struct RepresentationVector {
  std::string source_doc_id;
  std::size_t cut = 0;
  Vector values;
};

enum class LabelSingleSliceMode { Cosine, ClosedForm };
enum class KernelMode { Triple, SharedOnly };

struct KernelConfig {
  double delta = 1.0;
  bool normalize_gak = false;
  LabelSingleSliceMode label_single_slice_mode = LabelSingleSliceMode::Cosine;
  KernelMode kernel_mode = KernelMode::Triple;
  std::size_t cell_cap = 16384;
  // Label matrices use normalized GAK for multi-slice pairs so entries share
  // the cosine scale of the representation matrix; set to use raw GAK.
  bool raw_gak_labels = false;

  void validate() const;
};

// Stable 64-bit FNV-1a over the config fields.
std::uint64_t fingerprint(const KernelConfig& cfg);

}  // namespace sgak
