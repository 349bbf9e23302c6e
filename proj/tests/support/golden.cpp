#include "golden.hpp"

namespace sgak::testing {

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

RepresentationVector query(const std::string& id, std::initializer_list<double> v) {
  return RepresentationVector{id, 0, vec(v)};
}

}  // namespace

RetrievalIndex golden_index() {
  std::vector<IndexEntry> entries = {
      {"alpha", {1.0f, 0.0f, 0.0f, 0.0f}, "cluster=0"},
      {"beta", {0.0f, 1.0f, 0.0f, 0.0f}, ""},
      {"gamma", {0.6f, 0.8f, 0.0f, 0.0f}, "note=\"quoted\""},
      {"delta", {0.0f, 0.0f, -0.5f, 0.5f}, "utf8=\xc3\xa9"},
      {"epsilon", {0.5f, 0.5f, 0.5f, 0.5f}, "cluster=1"},
  };
  return RetrievalIndex::from_entries(4, std::move(entries));
}

std::vector<RecallFixture> recall_fixtures() {
  std::vector<RecallFixture> out;

  {
    // Query is closest to d1, d2, then d3 (the gold document).
    std::vector<IndexInput> in = {
        {"d1", vec({1.0, 0.0, 0.0}), ""},
        {"d2", vec({0.9, 0.1, 0.0}), ""},
        {"d3", vec({0.5, 0.5, 0.0}), ""},
        {"d4", vec({0.0, 0.0, 1.0}), ""},
        {"d5", vec({-1.0, 0.0, 0.0}), ""},
    };
    std::vector<EvalCase> cases;
    cases.push_back({query("q", {1.0, 0.0, 0.0}), {"d3"}});
    out.push_back({"gold_at_rank_3", RetrievalIndex::build(in), std::move(cases)});
  }
  {
    std::vector<IndexInput> in = {
        {"a", vec({1.0, 0.0}), ""},
        {"b", vec({0.0, 1.0}), ""},
        {"c", vec({0.7, 0.7}), ""},
        {"d", vec({-0.7, 0.7}), ""},
    };
    std::vector<EvalCase> cases;
    cases.push_back({query("q1", {1.0, 0.1}), {"a"}});
    cases.push_back({query("q2", {0.1, 1.0}), {"d"}});
    cases.push_back({query("q3", {-1.0, 0.0}), {"a", "b"}});
    cases.push_back({query("q4", {0.6, 0.8}), {"c", "b"}});
    out.push_back({"mixed_ranks", RetrievalIndex::build(in), std::move(cases)});
  }
  return out;
}

}  // namespace sgak::testing
