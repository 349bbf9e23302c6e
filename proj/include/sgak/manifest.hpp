#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgak/core.hpp"

namespace sgak {

// Manifest: one JSON object per line,
//   {"doc_id": "...", "meta": "...", "slices": [
//      {"modality": "image"|"text", "form": "composite",
//       "specialist": "<base64 f32 LE>", "shared": "<base64 f32 LE>"},
//      {"modality": "text", "form": "atomic", "whole": "<base64 f32 LE>"}]}
// "meta" is optional. Parts off unit norm by more than kNormTolerance are
// renormalized with a warning; parts below kDegenerateNorm are rejected.

struct ManifestDocument {
  InterleavedSequence sequence;
  std::string meta;
};

struct Manifest {
  std::vector<ManifestDocument> documents;

  const ManifestDocument* find(std::string_view doc_id) const;
};

// Throws Error(kFormatError) naming the line on any malformed record, and
// kDuplicateDocId / kShapeMismatch for corpus-level violations.
Manifest parse_manifest(std::istream& in);
Manifest read_manifest(const std::filesystem::path& path);

std::string manifest_line(const InterleavedSequence& seq, const std::string& meta = {});
void write_manifest(std::ostream& out, std::span<const ManifestDocument> docs);

std::string encode_f32_base64(const Vector& v);
Vector decode_f32_base64(std::string_view text);

}  // namespace sgak
