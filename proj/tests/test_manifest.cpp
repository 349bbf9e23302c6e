#include <gtest/gtest.h>

#include <sstream>

#include "sgak/error.hpp"
#include "sgak/manifest.hpp"
#include "sgak/random.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

namespace sgak {
namespace {

using testing::code_of;
using testing::vec;

Manifest parse(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest(in);
}

TEST(Base64, RoundTripAndKnownBytes) {
  // 1.0f is 00 00 80 3f little-endian.
  EXPECT_EQ(encode_f32_base64(vec({1.0})), "AACAPw==");
  EXPECT_EQ(decode_f32_base64("AACAPw=="), vec({1.0}));
  const Vector v = vec({0.5, -2.0, 3.25});
  EXPECT_EQ(decode_f32_base64(encode_f32_base64(v)), v);
  EXPECT_EQ(encode_f32_base64(Vector(0)), "");
}

TEST(Base64, RejectsMalformed) {
  EXPECT_EQ(code_of([] { decode_f32_base64("AAC"); }), ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { decode_f32_base64("AA*APw=="); }), ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { decode_f32_base64("AACA"); }), ErrorCode::kFormatError);  // 3 bytes
}

TEST(Manifest, RoundTrip) {
  SliceSampler sampler(61, 4, 4);
  std::vector<ManifestDocument> docs;
  for (int d = 0; d < 3; ++d) docs.push_back({sampler.composite_sequence("d" + std::to_string(d), 2 + d), "m"});
  std::ostringstream out;
  write_manifest(out, docs);
  const auto m = parse(out.str());
  ASSERT_EQ(m.documents.size(), 3u);
  for (std::size_t d = 0; d < 3; ++d) {
    const auto& a = docs[d].sequence;
    const auto& b = m.documents[d].sequence;
    EXPECT_EQ(b.doc_id, a.doc_id);
    EXPECT_EQ(m.documents[d].meta, "m");
    ASSERT_EQ(b.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(b.slices[i].modality(), a.slices[i].modality());
      EXPECT_TRUE(b.slices[i].flattened().isApprox(a.slices[i].flattened(), 1e-6));
      EXPECT_TRUE(validate_slice(b.slices[i]).ok());
    }
  }
  EXPECT_NE(m.find("d1"), nullptr);
  EXPECT_EQ(m.find("zz"), nullptr);
}

TEST(Manifest, AtomicAndRenormalization) {
  const std::string line =
      R"({"doc_id":"a","slices":[{"modality":"text","form":"atomic","whole":")" +
      encode_f32_base64(vec({3, 4})) + R"("}]})";
  const auto m = parse(line + "\n\n");
  ASSERT_EQ(m.documents.size(), 1u);
  const auto& s = m.documents[0].sequence.slices[0];
  EXPECT_FALSE(s.is_composite());
  EXPECT_NEAR(s.whole()(0), 0.6, 1e-7);
  EXPECT_EQ(m.documents[0].meta, "");
}

TEST(Manifest, Errors) {
  EXPECT_EQ(code_of([] { parse("{not json}\n"); }), ErrorCode::kFormatError);
  EXPECT_EQ(code_of([] { parse(R"({"slices":[]})"); }), ErrorCode::kFormatError);
  const std::string slice = R"({"modality":"text","form":"atomic","whole":")" +
                            encode_f32_base64(vec({1, 0})) + R"("})";
  const std::string wide = R"({"modality":"text","form":"atomic","whole":")" +
                           encode_f32_base64(vec({1, 0, 0})) + R"("})";
  const std::string zero = R"({"modality":"text","form":"atomic","whole":")" +
                           encode_f32_base64(vec({0, 0})) + R"("})";
  const std::string bad_mod = R"({"modality":"audio","form":"atomic","whole":")" +
                              encode_f32_base64(vec({1, 0})) + R"("})";
  auto doc = [](const std::string& id, const std::string& s) {
    return R"({"doc_id":")" + id + R"(","slices":[)" + s + "]}\n";
  };
  EXPECT_EQ(code_of([&] { parse(doc("a", slice) + doc("a", slice)); }), ErrorCode::kDuplicateDocId);
  EXPECT_EQ(code_of([&] { parse(doc("a", slice) + doc("b", wide)); }), ErrorCode::kShapeMismatch);
  EXPECT_EQ(code_of([&] { parse(doc("a", zero)); }), ErrorCode::kDegenerateVector);
  EXPECT_EQ(code_of([&] { parse(doc("a", bad_mod)); }), ErrorCode::kFormatError);
  try {
    parse(doc("a", slice) + "[1,2]\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Manifest, ShippedFixturesParse) {
  const auto small = read_manifest(std::filesystem::path(SGAK_FIXTURE_DIR) / "small_manifest.jsonl");
  EXPECT_EQ(small.documents.size(), 5u);
  const auto synth = read_manifest(std::filesystem::path(SGAK_FIXTURE_DIR) / "synthetic_manifest.jsonl");
  const auto task = testing::make_two_cluster_task();
  ASSERT_EQ(synth.documents.size(), task.documents.size());
  for (std::size_t d = 0; d < task.documents.size(); ++d) {
    EXPECT_EQ(synth.documents[d].sequence.doc_id, task.documents[d].sequence.doc_id);
    EXPECT_EQ(synth.documents[d].meta, task.documents[d].meta);
  }
  EXPECT_EQ(code_of([] { read_manifest("/nonexistent/manifest.jsonl"); }), ErrorCode::kIoFailure);
}

}  // namespace
}  // namespace sgak
