#pragma once

#include <cstdint>
#include <random>

#include "sgak/core.hpp"

namespace sgak {

// Seeded generators for synthetic slices and sequences. Used by the
// self-test suites, the tests and the fixture generator.
class SliceSampler {
 public:
  SliceSampler(std::uint64_t seed, Eigen::Index specialist_dim, Eigen::Index shared_dim)
      : rng_(seed), d1_(specialist_dim), d2_(shared_dim) {}

  Vector unit(Eigen::Index dim);
  Vector gaussian(Eigen::Index dim, double stddev = 1.0);
  Modality modality();

  SliceEmbedding composite();
  SliceEmbedding composite(Modality m);
  SliceEmbedding atomic(Eigen::Index dim);

  InterleavedSequence composite_sequence(std::string doc_id, std::size_t n);

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  Eigen::Index d1_;
  Eigen::Index d2_;
};

}  // namespace sgak
