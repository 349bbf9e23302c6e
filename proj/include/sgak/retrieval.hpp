#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sgak/core.hpp"

namespace sgak {

struct IndexEntry {
  std::string doc_id;
  std::vector<float> rep;  // unit norm
  std::string meta;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct IndexInput {
  std::string doc_id;
  Vector rep;
  std::string meta;
};

// Exact brute-force cosine index. Immutable once built.
class RetrievalIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  // Normalizes every rep. Throws kDuplicateDocId, kDimMismatch
  // (kDimensionMismatch), kDegenerateVector or kEmptyIndex.
  static RetrievalIndex build(std::span<const IndexInput> inputs,
                              std::uint64_t config_fingerprint = 0);
  // Takes entries as stored on disk; reps are not renormalized.
  static RetrievalIndex from_entries(std::uint32_t dim, std::vector<IndexEntry> entries);

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<IndexEntry>& entries() const { return entries_; }
  bool contains(const std::string& doc_id) const;

  // In-memory provenance; not part of the version 1 file layout.
  std::int64_t created_at() const { return created_at_; }
  std::uint64_t config_fingerprint() const { return config_fingerprint_; }

 private:
  std::uint32_t dim_ = 0;
  std::vector<IndexEntry> entries_;
  std::int64_t created_at_ = 0;
  std::uint64_t config_fingerprint_ = 0;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
};

// Top-k by descending cosine, ties by ascending doc_id. k larger than the
// index returns the full ranking.
std::vector<ScoredDoc> query_topk(const RetrievalIndex& index, const Vector& query, std::size_t k);

struct EvalCase {
  std::variant<RepresentationVector, InterleavedSequence> query;
  std::set<std::string> gold_doc_ids;
};

struct EvalReport {
  std::vector<std::size_t> ks;
  std::vector<double> recall;  // aligned with ks
  // 1-based rank of the best-ranked gold id for each case.
  std::vector<std::size_t> first_gold_rank;
};

// Cases must carry RepresentationVector queries.
EvalReport recall_at_k(std::span<const EvalCase> cases, const RetrievalIndex& index,
                       std::span<const std::size_t> ks);

// Sequence-vs-sequence ranking by gak_forward over a corpus. Slow path for
// experiments; ties by ascending doc_id.
std::vector<ScoredDoc> query_topk_gak(std::span<const InterleavedSequence> corpus,
                                      const InterleavedSequence& query, std::size_t k,
                                      const KernelConfig& cfg);

// Recall@k where both queries and corpus are sequences, ranked by GAK.
EvalReport recall_at_k_gak(std::span<const EvalCase> cases,
                           std::span<const InterleavedSequence> corpus,
                           std::span<const std::size_t> ks, const KernelConfig& cfg);

// S[c][i] = sim(caption c, image i).
using WinogroundExample = std::array<std::array<double, 2>, 2>;

struct WinogroundScores {
  double text = 0.0;
  double image = 0.0;
  double group = 0.0;
};

struct WinogroundOutcome {
  bool text = false;
  bool image = false;
  bool group = false;
};

WinogroundOutcome score_winoground(const WinogroundExample& s);
WinogroundScores winoground_scores(std::span<const WinogroundExample> examples);

// Keeps the first `captions` text slices and the first `images` image slices
// of a story, in their original order. "5c" is (5, 0), "5c+4i" is (5, 4).
InterleavedSequence make_interleaved_query(const InterleavedSequence& story, std::size_t captions,
                                           std::size_t images);

void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_index(const RetrievalIndex& index);
RetrievalIndex deserialize_index(std::span<const std::uint8_t> bytes);

}  // namespace sgak
