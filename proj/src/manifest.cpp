#include "sgak/manifest.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sgak/error.hpp"

namespace sgak {

namespace {

using nlohmann::json;

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<int, 256> make_decode_table() {
  std::array<int, 256> t{};
  for (auto& v : t) v = -1;
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) t[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
  return t;
}

constexpr auto kDecode = make_decode_table();

std::string base64_encode(std::span<const std::uint8_t> in) {
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == in.size()) {
    const std::uint32_t v = in[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == in.size()) {
    const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view in) {
  if (in.size() % 4 != 0) throw Error(ErrorCode::kFormatError, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(in.size() / 4 * 3);
  for (std::size_t i = 0; i < in.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const char c = in[i + j];
      if (c == '=' && i + 4 == in.size() && j >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = kDecode[static_cast<unsigned char>(c)];
      if (d < 0 || pad > 0) throw Error(ErrorCode::kFormatError, "invalid base64 character");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

Modality parse_modality(const std::string& s) {
  if (s == "image") return Modality::Image;
  if (s == "text") return Modality::Text;
  throw Error(ErrorCode::kFormatError, fmt::format("unknown modality '{}'", s));
}

Vector load_part(const json& slice, const char* field, const std::string& where) {
  if (!slice.contains(field) || !slice[field].is_string()) {
    throw Error(ErrorCode::kFormatError, fmt::format("{}: missing string field '{}'", where, field));
  }
  Vector v = decode_f32_base64(slice[field].get<std::string>());
  if (v.size() == 0) throw Error(ErrorCode::kFormatError, fmt::format("{}: '{}' is empty", where, field));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::kFormatError,
                  fmt::format("{}: '{}' has a non-finite value at index {}", where, field, i));
    }
  }
  const double norm = v.norm();
  if (norm < kDegenerateNorm) {
    throw Error(ErrorCode::kDegenerateVector, fmt::format("{}: '{}' has norm {}", where, field, norm));
  }
  if (std::abs(norm - 1.0) > kNormTolerance) {
    spdlog::warn("{}: '{}' has norm {}; renormalizing", where, field, norm);
  }
  // f32 storage leaves every vector ~1e-7 off unit norm, so always normalize.
  return v / norm;
}

ManifestDocument parse_record(const json& rec, std::size_t line_no) {
  const std::string where = fmt::format("manifest line {}", line_no);
  if (!rec.is_object()) throw Error(ErrorCode::kFormatError, where + ": record is not an object");
  if (!rec.contains("doc_id") || !rec["doc_id"].is_string()) {
    throw Error(ErrorCode::kFormatError, where + ": missing string field 'doc_id'");
  }
  if (!rec.contains("slices") || !rec["slices"].is_array() || rec["slices"].empty()) {
    throw Error(ErrorCode::kFormatError, where + ": 'slices' must be a non-empty array");
  }
  ManifestDocument doc;
  doc.sequence.doc_id = rec["doc_id"].get<std::string>();
  if (rec.contains("meta")) {
    if (!rec["meta"].is_string()) throw Error(ErrorCode::kFormatError, where + ": 'meta' must be a string");
    doc.meta = rec["meta"].get<std::string>();
  }
  std::size_t idx = 0;
  for (const auto& slice : rec["slices"]) {
    const std::string at = fmt::format("{} slice {}", where, idx++);
    if (!slice.is_object() || !slice.contains("modality") || !slice["modality"].is_string() ||
        !slice.contains("form") || !slice["form"].is_string()) {
      throw Error(ErrorCode::kFormatError, at + ": needs string 'modality' and 'form'");
    }
    const Modality modality = parse_modality(slice["modality"].get<std::string>());
    const std::string form = slice["form"].get<std::string>();
    if (form == "composite") {
      doc.sequence.slices.push_back(SliceEmbedding::composite(
          modality, load_part(slice, "specialist", at), load_part(slice, "shared", at)));
    } else if (form == "atomic") {
      doc.sequence.slices.push_back(SliceEmbedding::atomic(modality, load_part(slice, "whole", at)));
    } else {
      throw Error(ErrorCode::kFormatError, fmt::format("{}: unknown form '{}'", at, form));
    }
  }
  return doc;
}

}  // namespace

std::string encode_f32_base64(const Vector& v) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(static_cast<std::size_t>(v.size()) * 4);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v[i]));
    for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
  return base64_encode(bytes);
}

Vector decode_f32_base64(std::string_view text) {
  const auto bytes = base64_decode(text);
  if (bytes.size() % 4 != 0) throw Error(ErrorCode::kFormatError, "float payload is not a multiple of 4 bytes");
  Vector v(static_cast<Eigen::Index>(bytes.size() / 4));
  for (std::size_t i = 0; i < bytes.size() / 4; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
    v[static_cast<Eigen::Index>(i)] = std::bit_cast<float>(bits);
  }
  return v;
}

const ManifestDocument* Manifest::find(std::string_view doc_id) const {
  for (const auto& d : documents) {
    if (d.sequence.doc_id == doc_id) return &d;
  }
  return nullptr;
}

Manifest parse_manifest(std::istream& in) {
  Manifest manifest;
  std::unordered_set<std::string> ids;
  std::optional<SliceShape> corpus_shape;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kFormatError, fmt::format("manifest line {}: {}", line_no, e.what()));
    }
    auto doc = parse_record(rec, line_no);
    if (!ids.insert(doc.sequence.doc_id).second) {
      throw Error(ErrorCode::kDuplicateDocId,
                  fmt::format("manifest line {}: doc_id '{}' repeated", line_no, doc.sequence.doc_id));
    }
    check_uniform_shape(doc.sequence);
    const auto shape = shape_of(doc.sequence.slices.front());
    if (corpus_shape && *corpus_shape != shape) {
      throw Error(ErrorCode::kShapeMismatch,
                  fmt::format("manifest line {}: embedding shape differs from earlier documents", line_no));
    }
    corpus_shape = shape;
    manifest.documents.push_back(std::move(doc));
  }
  return manifest;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, fmt::format("cannot open manifest '{}'", path.string()));
  return parse_manifest(in);
}

std::string manifest_line(const InterleavedSequence& seq, const std::string& meta) {
  json rec;
  rec["doc_id"] = seq.doc_id;
  if (!meta.empty()) rec["meta"] = meta;
  json slices = json::array();
  for (const auto& s : seq.slices) {
    json js;
    js["modality"] = std::string(modality_name(s.modality()));
    if (s.is_composite()) {
      js["form"] = "composite";
      js["specialist"] = encode_f32_base64(s.specialist());
      js["shared"] = encode_f32_base64(s.shared());
    } else {
      js["form"] = "atomic";
      js["whole"] = encode_f32_base64(s.whole());
    }
    slices.push_back(std::move(js));
  }
  rec["slices"] = std::move(slices);
  return rec.dump();
}

void write_manifest(std::ostream& out, std::span<const ManifestDocument> docs) {
  for (const auto& d : docs) out << manifest_line(d.sequence, d.meta) << '\n';
}

}  // namespace sgak
