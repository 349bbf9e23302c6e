#pragma once

#include <cstddef>

#include "sgak/core.hpp"

namespace sgak {

// Squared distance between two slices. In Triple mode a pair of composite
// slices is compared on the specialist sub-vectors when the modalities match
// and on the shared sub-vectors when they differ; atomic pairs use the whole
// vectors. SharedOnly mode always compares composite pairs on the shared part.
// Mixing an atomic with a composite slice throws kMixedFormPair.
double triple_distance(const SliceEmbedding& a, const SliceEmbedding& b,
                       KernelMode mode = KernelMode::Triple);

// Cosine between the same sub-vectors triple_distance would compare.
double triple_cosine(const SliceEmbedding& a, const SliceEmbedding& b,
                     KernelMode mode = KernelMode::Triple);

// delta * sqrt((n + m) / 2)
double sigma(std::size_t n, std::size_t m, double delta);

// u / (2 - u) with u = exp(-distance / (2 sigma^2)); always in (0, 1].
double local_kernel_from_distance(double distance, double sigma);

double local_kernel(const SliceEmbedding& a, const SliceEmbedding& b, double sigma,
                    KernelMode mode = KernelMode::Triple);

}  // namespace sgak
