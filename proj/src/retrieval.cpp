#include "sgak/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "sgak/error.hpp"
#include "sgak/gak.hpp"

namespace sgak {

namespace {

Vector to_vector(const std::vector<float>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

void sort_ranking(std::vector<ScoredDoc>& ranking, std::size_t k) {
  auto better = [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  };
  const std::size_t keep = std::min(k, ranking.size());
  std::partial_sort(ranking.begin(), ranking.begin() + static_cast<long>(keep), ranking.end(),
                    better);
  ranking.resize(keep);
}

void check_ks(std::span<const std::size_t> ks) {
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "no k values given");
  for (std::size_t k : ks) {
    if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  }
}

// Rank (1-based) of the best gold id in a full ranking; ranking.size()+1 when
// absent.
std::size_t first_gold_rank(const std::vector<ScoredDoc>& ranking,
                            const std::set<std::string>& gold) {
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (gold.contains(ranking[r].doc_id)) return r + 1;
  }
  return ranking.size() + 1;
}

EvalReport summarize(std::vector<std::size_t> ranks, std::span<const std::size_t> ks) {
  EvalReport report;
  report.ks.assign(ks.begin(), ks.end());
  for (std::size_t k : ks) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
    report.recall.push_back(static_cast<double>(hits) / static_cast<double>(ranks.size()));
  }
  report.first_gold_rank = std::move(ranks);
  return report;
}

}  // namespace

RetrievalIndex RetrievalIndex::build(std::span<const IndexInput> inputs,
                                     std::uint64_t config_fingerprint) {
  if (inputs.empty()) throw Error(ErrorCode::kEmptyIndex, "cannot build an index with no entries");
  const auto dim = inputs.front().rep.size();
  std::unordered_set<std::string> ids;
  std::vector<IndexEntry> entries;
  entries.reserve(inputs.size());
  for (const auto& in : inputs) {
    if (in.rep.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("entry '{}' has dim {}, expected {}", in.doc_id, in.rep.size(), dim));
    }
    if (!ids.insert(in.doc_id).second) {
      throw Error(ErrorCode::kDuplicateDocId, fmt::format("doc_id '{}' repeated", in.doc_id));
    }
    const Vector unit = normalized(in.rep);
    IndexEntry e{in.doc_id, std::vector<float>(static_cast<std::size_t>(dim)), in.meta};
    for (Eigen::Index i = 0; i < dim; ++i) e.rep[static_cast<std::size_t>(i)] = static_cast<float>(unit[i]);
    entries.push_back(std::move(e));
  }
  RetrievalIndex index = from_entries(static_cast<std::uint32_t>(dim), std::move(entries));
  index.created_at_ = std::chrono::duration_cast<std::chrono::seconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  index.config_fingerprint_ = config_fingerprint;
  return index;
}

RetrievalIndex RetrievalIndex::from_entries(std::uint32_t dim, std::vector<IndexEntry> entries) {
  std::unordered_set<std::string> ids;
  for (const auto& e : entries) {
    if (e.rep.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("entry '{}' has dim {}, expected {}", e.doc_id, e.rep.size(), dim));
    }
    if (!ids.insert(e.doc_id).second) {
      throw Error(ErrorCode::kDuplicateDocId, fmt::format("doc_id '{}' repeated", e.doc_id));
    }
  }
  RetrievalIndex index;
  index.dim_ = dim;
  index.entries_ = std::move(entries);
  return index;
}

bool RetrievalIndex::contains(const std::string& doc_id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const IndexEntry& e) { return e.doc_id == doc_id; });
}

std::vector<ScoredDoc> query_topk(const RetrievalIndex& index, const Vector& query, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (index.size() == 0) throw Error(ErrorCode::kEmptyIndex, "query against an empty index");
  if (query.size() != static_cast<Eigen::Index>(index.dim())) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("query dim {} vs index dim {}", query.size(), index.dim()));
  }
  const Vector q = normalized(query);
  std::vector<ScoredDoc> ranking;
  ranking.reserve(index.size());
  for (const auto& e : index.entries()) {
    const Vector rep = to_vector(e.rep);
    const double score = std::clamp(rep.dot(q) / rep.norm(), -1.0, 1.0);
    ranking.push_back({e.doc_id, score});
  }
  sort_ranking(ranking, k);
  return ranking;
}

EvalReport recall_at_k(std::span<const EvalCase> cases, const RetrievalIndex& index,
                       std::span<const std::size_t> ks) {
  if (cases.empty()) throw Error(ErrorCode::kInvalidArgument, "recall over an empty case list");
  check_ks(ks);
  std::vector<std::size_t> ranks;
  ranks.reserve(cases.size());
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& ec = cases[c];
    if (ec.gold_doc_ids.empty()) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("case {} has no gold ids", c));
    }
    for (const auto& g : ec.gold_doc_ids) {
      if (!index.contains(g)) {
        throw Error(ErrorCode::kMissingGoldId, fmt::format("case {}: gold '{}' not indexed", c, g));
      }
    }
    const auto* rep = std::get_if<RepresentationVector>(&ec.query);
    if (rep == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("case {} has a sequence query; use recall_at_k_gak", c));
    }
    ranks.push_back(first_gold_rank(query_topk(index, rep->values, index.size()), ec.gold_doc_ids));
  }
  return summarize(std::move(ranks), ks);
}

std::vector<ScoredDoc> query_topk_gak(std::span<const InterleavedSequence> corpus,
                                      const InterleavedSequence& query, std::size_t k,
                                      const KernelConfig& cfg) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (corpus.empty()) throw Error(ErrorCode::kEmptyIndex, "query against an empty corpus");
  std::vector<ScoredDoc> ranking;
  ranking.reserve(corpus.size());
  for (const auto& doc : corpus) ranking.push_back({doc.doc_id, gak_forward(query, doc, cfg)});
  sort_ranking(ranking, k);
  return ranking;
}

EvalReport recall_at_k_gak(std::span<const EvalCase> cases,
                           std::span<const InterleavedSequence> corpus,
                           std::span<const std::size_t> ks, const KernelConfig& cfg) {
  if (cases.empty()) throw Error(ErrorCode::kInvalidArgument, "recall over an empty case list");
  check_ks(ks);
  std::unordered_set<std::string> ids;
  for (const auto& doc : corpus) ids.insert(doc.doc_id);
  std::vector<std::size_t> ranks;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto& ec = cases[c];
    for (const auto& g : ec.gold_doc_ids) {
      if (!ids.contains(g)) {
        throw Error(ErrorCode::kMissingGoldId, fmt::format("case {}: gold '{}' not in corpus", c, g));
      }
    }
    const auto* seq = std::get_if<InterleavedSequence>(&ec.query);
    if (seq == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("case {} has a vector query; use recall_at_k", c));
    }
    ranks.push_back(
        first_gold_rank(query_topk_gak(corpus, *seq, corpus.size(), cfg), ec.gold_doc_ids));
  }
  return summarize(std::move(ranks), ks);
}

WinogroundOutcome score_winoground(const WinogroundExample& s) {
  for (const auto& row : s) {
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kMalformedExample, "non-finite similarity");
    }
  }
  WinogroundOutcome out;
  out.text = s[0][0] > s[1][0] && s[1][1] > s[0][1];
  out.image = s[0][0] > s[0][1] && s[1][1] > s[1][0];
  out.group = out.text && out.image;
  return out;
}

WinogroundScores winoground_scores(std::span<const WinogroundExample> examples) {
  if (examples.empty()) throw Error(ErrorCode::kMalformedExample, "no examples to score");
  std::size_t text = 0;
  std::size_t image = 0;
  std::size_t group = 0;
  for (const auto& ex : examples) {
    const auto o = score_winoground(ex);
    text += o.text;
    image += o.image;
    group += o.group;
  }
  const auto n = static_cast<double>(examples.size());
  return {static_cast<double>(text) / n, static_cast<double>(image) / n,
          static_cast<double>(group) / n};
}

InterleavedSequence make_interleaved_query(const InterleavedSequence& story, std::size_t captions,
                                           std::size_t images) {
  std::size_t text_seen = 0;
  std::size_t image_seen = 0;
  InterleavedSequence out{story.doc_id, {}};
  for (const auto& s : story.slices) {
    if (s.modality() == Modality::Text && text_seen < captions) {
      ++text_seen;
      out.slices.push_back(s);
    } else if (s.modality() == Modality::Image && image_seen < images) {
      ++image_seen;
      out.slices.push_back(s);
    }
  }
  if (text_seen < captions || image_seen < images) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("story '{}' has {} captions and {} images; asked for {}c+{}i",
                            story.doc_id, text_seen, image_seen, captions, images));
  }
  if (out.slices.empty()) throw Error(ErrorCode::kEmptySequence, "query recipe selects nothing");
  return out;
}

}  // namespace sgak
