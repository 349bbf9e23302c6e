#include "sgak/random.hpp"

namespace sgak {

Vector SliceSampler::gaussian(Eigen::Index dim, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng_);
  return v;
}

Vector SliceSampler::unit(Eigen::Index dim) {
  for (;;) {
    Vector v = gaussian(dim);
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

Modality SliceSampler::modality() {
  return std::bernoulli_distribution(0.5)(rng_) ? Modality::Image : Modality::Text;
}

SliceEmbedding SliceSampler::composite() { return composite(modality()); }

SliceEmbedding SliceSampler::composite(Modality m) {
  Vector specialist = unit(d1_);
  Vector shared = unit(d2_);
  return SliceEmbedding::composite(m, std::move(specialist), std::move(shared));
}

SliceEmbedding SliceSampler::atomic(Eigen::Index dim) {
  Modality m = modality();
  return SliceEmbedding::atomic(m, unit(dim));
}

InterleavedSequence SliceSampler::composite_sequence(std::string doc_id, std::size_t n) {
  InterleavedSequence seq{std::move(doc_id), {}};
  seq.slices.reserve(n);
  for (std::size_t i = 0; i < n; ++i) seq.slices.push_back(composite());
  return seq;
}

}  // namespace sgak
