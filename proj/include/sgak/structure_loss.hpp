#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sgak/core.hpp"

namespace sgak {

enum class MatrixKind { Label, Representation };

struct SimilarityMatrix {
  MatrixKind kind = MatrixKind::Label;
  Eigen::MatrixXd entries;

  Eigen::Index size() const { return entries.rows(); }
};

// Pairwise similarity of the input sequences behind a batch of views.
// Views sharing a source document get exactly 1. Two one-slice views use
// their cosine (or the closed form, per cfg.label_single_slice_mode); every
// other pair uses normalized gak_forward (raw with cfg.raw_gak_labels).
SimilarityMatrix label_matrix(std::span<const PrefixView> views, const KernelConfig& cfg);

SimilarityMatrix representation_matrix(std::span<const RepresentationVector> reps);
SimilarityMatrix representation_matrix(std::span<const Vector> reps);

// (1/n) * sum_ij (mr_ij - ml_ij)^2
double mse_loss(const SimilarityMatrix& mr, const SimilarityMatrix& ml);

// d mse_loss(representation_matrix(reps), ml) / d reps[i]. Exact for
// vectors of any non-zero norm; for unit vectors the result lies in the
// tangent space of the sphere.
std::vector<Vector> loss_gradient(std::span<const RepresentationVector> reps,
                                  const SimilarityMatrix& ml);
std::vector<Vector> loss_gradient(std::span<const Vector> reps, const SimilarityMatrix& ml);

struct TrainerConfig {
  double learning_rate = 0.5;
  std::size_t steps = 200;
  std::uint64_t seed = 42;
  Eigen::Index input_dim = 0;
  Eigen::Index output_dim = 0;
  // Weight of the discriminative term next to a generative loss. Carried for
  // completeness; the trainer optimises the discriminative loss alone.
  double alpha = 1.0;
  std::size_t max_halvings = 30;

  void validate() const;
};

// Linear retrieval projector: r = normalize(weights * hidden).
struct Projector {
  Eigen::MatrixXd weights;  // output_dim x input_dim

  Vector apply(const Vector& hidden) const;
};

struct TrainResult {
  Projector projector;
  // loss_trace[0] is the initial loss; loss_trace[s] the loss after step s.
  std::vector<double> loss_trace;
};

// Full-batch gradient descent on the discriminative loss with backtracking
// step halving, so the trace never increases. Deterministic for a given seed.
TrainResult train_projector(std::span<const Vector> hidden, std::span<const PrefixView> views,
                            const KernelConfig& cfg, const TrainerConfig& tcfg);

// Same, with a precomputed label matrix.
TrainResult train_projector(std::span<const Vector> hidden, const SimilarityMatrix& labels,
                            const TrainerConfig& tcfg);

}  // namespace sgak
