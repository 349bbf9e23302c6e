#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "sgak/core.hpp"
#include "sgak/error.hpp"
#include "test_util.hpp"

namespace sgak {
namespace {

using testing::code_of;
using testing::vec;

TEST(SliceEmbedding, CompositeAccessors) {
  const auto s = SliceEmbedding::composite(Modality::Image, vec({1, 0}), vec({0, 0, 1}));
  EXPECT_TRUE(s.is_composite());
  EXPECT_EQ(s.dim(), 5);
  EXPECT_EQ(s.flattened(), vec({1, 0, 0, 0, 1}));
  EXPECT_EQ(shape_of(s), (SliceShape{SliceForm::Composite, 2, 3}));
}

TEST(SliceEmbedding, NormalizedFactoriesNormalizeEachPart) {
  const auto s = SliceEmbedding::normalized_composite(Modality::Text, vec({3, 4}), vec({0, 2}));
  EXPECT_DOUBLE_EQ(s.specialist().norm(), 1.0);
  EXPECT_DOUBLE_EQ(s.shared().norm(), 1.0);
  EXPECT_TRUE(validate_slice(s).ok());
}

TEST(SliceEmbedding, DegeneratePartRejected) {
  EXPECT_EQ(code_of([] { SliceEmbedding::normalized_atomic(Modality::Text, vec({0, 0})); }),
            ErrorCode::kDegenerateVector);
  EXPECT_EQ(code_of([] {
              SliceEmbedding::normalized_composite(Modality::Text, vec({1, 0}), vec({1e-12, 0}));
            }),
            ErrorCode::kDegenerateVector);
}

TEST(ValidateSlice, UnitCompositeIsValid) {
  const auto s = SliceEmbedding::composite(Modality::Image, vec({1, 0}), vec({0, 1}));
  EXPECT_TRUE(validate_slice(s).ok());
}

TEST(ValidateSlice, ReportsNormDeviationPerPart) {
  const auto s = SliceEmbedding::composite(Modality::Image, vec({1.1, 0}), vec({0, 0.5}));
  const auto report = validate_slice(s);
  ASSERT_EQ(report.violations.size(), 2u);
  EXPECT_EQ(report.violations[0].kind, ViolationKind::NormDeviation);
  EXPECT_NE(report.violations[0].message.find("specialist"), std::string::npos);
  EXPECT_NE(report.violations[1].message.find("shared"), std::string::npos);
}

TEST(ValidateSlice, DeviationWithinToleranceAccepted) {
  const auto s = SliceEmbedding::atomic(Modality::Text, vec({1.0 + 5e-7, 0}));
  EXPECT_TRUE(validate_slice(s).ok());
  const auto bad = SliceEmbedding::atomic(Modality::Text, vec({1.0 + 5e-6, 0}));
  EXPECT_FALSE(validate_slice(bad).ok());
}

TEST(ValidateSlice, NonFiniteAndShape) {
  const auto s = SliceEmbedding::atomic(Modality::Text, vec({std::numeric_limits<double>::quiet_NaN(), 1}));
  const auto report = validate_slice(s, SliceShape{SliceForm::Atomic, 3, 0});
  bool non_finite = false;
  bool shape = false;
  for (const auto& viol : report.violations) {
    non_finite = non_finite || viol.kind == ViolationKind::NonFinite;
    shape = shape || viol.kind == ViolationKind::ShapeMismatch;
  }
  EXPECT_TRUE(non_finite);
  EXPECT_TRUE(shape);
}

TEST(Sequences, ShapeChecks) {
  InterleavedSequence x{"x", {SliceEmbedding::atomic(Modality::Text, vec({1, 0}))}};
  InterleavedSequence y{"y", {SliceEmbedding::atomic(Modality::Text, vec({1, 0, 0}))}};
  EXPECT_NO_THROW(check_uniform_shape(x));
  EXPECT_EQ(code_of([&] { check_compatible(x, y); }), ErrorCode::kShapeMismatch);
  x.slices.push_back(SliceEmbedding::composite(Modality::Image, vec({1}), vec({1})));
  EXPECT_EQ(code_of([&] { check_uniform_shape(x); }), ErrorCode::kShapeMismatch);
}

InterleavedSequence three_slices() {
  return {"doc", {SliceEmbedding::atomic(Modality::Text, vec({1, 0})),
                  SliceEmbedding::atomic(Modality::Image, vec({0, 1})),
                  SliceEmbedding::atomic(Modality::Text, vec({-1, 0}))}};
}

TEST(PrefixViews, CutsTakePrefixes) {
  const auto seq = three_slices();
  const std::size_t cuts[] = {1, 3};
  const auto views = make_prefix_views(seq, cuts);
  ASSERT_EQ(views.size(), 2u);
  EXPECT_EQ(views[0].cut, 1u);
  EXPECT_EQ(views[0].slices.size(), 1u);
  EXPECT_EQ(views[1].slices.size(), 3u);
  EXPECT_EQ(views[1].source_doc_id, "doc");
  EXPECT_EQ(views[1].as_sequence().doc_id, "doc");
}

TEST(PrefixViews, RejectsBadCuts) {
  const auto seq = three_slices();
  const std::size_t zero[] = {0};
  const std::size_t past[] = {4};
  const std::size_t dup[] = {2, 2};
  EXPECT_EQ(code_of([&] { make_prefix_views(seq, zero); }), ErrorCode::kOutOfRangeCut);
  EXPECT_EQ(code_of([&] { make_prefix_views(seq, past); }), ErrorCode::kOutOfRangeCut);
  EXPECT_EQ(code_of([&] { make_prefix_views(seq, dup); }), ErrorCode::kDuplicateCut);
}

TEST(SampleCuts, DistinctSortedAndSeeded) {
  const auto a = sample_cuts(10, 4, 42);
  EXPECT_EQ(a, sample_cuts(10, 4, 42));
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(a[i], 1u);
    EXPECT_LE(a[i], 10u);
    if (i > 0) EXPECT_LT(a[i - 1], a[i]);
  }
  EXPECT_EQ(sample_cuts(5, 5, 1), (std::vector<std::size_t>{1, 2, 3, 4, 5}));
}

TEST(Pooling, LastTokenAndAverage) {
  const std::vector<Vector> tokens = {vec({1, 0}), vec({0, 1})};
  EXPECT_EQ(pool_representation(tokens, PoolingPolicy::LastToken), vec({0, 1}));
  const Vector avg = pool_representation(tokens, PoolingPolicy::AveragePool);
  EXPECT_NEAR(avg(0), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(avg(1), std::sqrt(0.5), 1e-15);
}

TEST(Pooling, Errors) {
  const std::vector<Vector> none;
  EXPECT_EQ(code_of([&] { pool_representation(none, PoolingPolicy::LastToken); }),
            ErrorCode::kEmptyTokenList);
  const std::vector<Vector> ragged = {vec({1, 0}), vec({1})};
  EXPECT_EQ(code_of([&] { pool_representation(ragged, PoolingPolicy::AveragePool); }),
            ErrorCode::kDimensionMismatch);
  const std::vector<Vector> cancel = {vec({1, 0}), vec({-1, 0})};
  EXPECT_EQ(code_of([&] { pool_representation(cancel, PoolingPolicy::AveragePool); }),
            ErrorCode::kDegenerateVector);
}

TEST(KernelConfig, ValidateAndFingerprint) {
  KernelConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  const auto base = fingerprint(cfg);
  EXPECT_EQ(base, fingerprint(KernelConfig{}));
  cfg.delta = 2.0;
  EXPECT_NE(fingerprint(cfg), base);
  cfg.delta = 0.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::kNonPositiveDelta);
}

TEST(Error, MessageCarriesCodeName) {
  const Error e(ErrorCode::kBadMagic, "nope");
  EXPECT_EQ(std::string(e.what()), "BadMagic: nope");
  EXPECT_EQ(e.code(), ErrorCode::kBadMagic);
}

}  // namespace
}  // namespace sgak
