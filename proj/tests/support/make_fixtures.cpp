// Regenerates tests/fixtures. Usage: sgak_make_fixtures <fixture-dir>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "golden.hpp"
#include "sgak/manifest.hpp"
#include "sgak/retrieval.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace sgak;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

void write_small_manifest(const fs::path& path) {
  // x and y: identical two-slice documents of orthogonal atomic slices.
  // z, u: single slices with cosine 0.6. w: three slices.
  InterleavedSequence x{"x", {SliceEmbedding::atomic(Modality::Text, vec2(1, 0)),
                              SliceEmbedding::atomic(Modality::Image, vec2(0, 1))}};
  InterleavedSequence y{"y", x.slices};
  InterleavedSequence z{"z", {SliceEmbedding::atomic(Modality::Text, vec2(0.6, 0.8))}};
  InterleavedSequence u{"u", {SliceEmbedding::atomic(Modality::Text, vec2(1, 0))}};
  InterleavedSequence w{"w", {SliceEmbedding::atomic(Modality::Image, vec2(0, 1)),
                              SliceEmbedding::atomic(Modality::Text, vec2(-1, 0)),
                              SliceEmbedding::atomic(Modality::Text, vec2(0.6, -0.8))}};
  std::vector<ManifestDocument> docs = {{x, "kind=pair"}, {y, "kind=pair"}, {z, ""}, {u, ""}, {w, ""}};
  std::ofstream out(path);
  write_manifest(out, docs);
}

void write_synthetic(const fs::path& dir) {
  const auto task = testing::make_two_cluster_task();
  {
    std::ofstream out(dir / "synthetic_manifest.jsonl");
    write_manifest(out, task.documents);
  }
  std::ofstream hidden(dir / "synthetic_hidden.jsonl");
  for (std::size_t i = 0; i < task.documents.size(); ++i) {
    const auto& seq = task.documents[i].sequence;
    nlohmann::ordered_json j;
    j["doc_id"] = seq.doc_id;
    j["cut"] = seq.size();
    j["hidden"] = encode_f32_base64(task.hidden[i]);
    hidden << j.dump() << '\n';
  }
}

void write_recall(const fs::path& dir) {
  for (const auto& f : testing::recall_fixtures()) {
    save_index(f.index, dir / (f.name + ".sgix"));
    std::ofstream out(dir / (f.name + "_cases.jsonl"));
    for (const auto& c : f.cases) {
      const auto& q = std::get<RepresentationVector>(c.query);
      nlohmann::ordered_json j;
      j["query"] = encode_f32_base64(q.values);
      j["gold"] = c.gold_doc_ids;
      out << j.dump() << '\n';
    }
  }
}

void write_winoground(const fs::path& path) {
  std::ofstream out(path);
  out << R"({"id":"diag","s":[[1.0,0.0],[0.0,1.0]]})" << '\n';
  out << R"({"id":"anti","s":[[0.0,1.0],[1.0,0.0]]})" << '\n';
  out << R"({"id":"mixed","s":[[0.9,0.2],[0.8,0.85]]})" << '\n';
  out << R"({"id":"text_only","s":[[0.9,0.95],[0.1,0.96]]})" << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <fixture-dir>\n", argv[0]);
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  save_index(testing::golden_index(), dir / "golden_index.sgix");
  write_small_manifest(dir / "small_manifest.jsonl");
  write_synthetic(dir);
  write_recall(dir);
  write_winoground(dir / "winoground.jsonl");
  return 0;
}
