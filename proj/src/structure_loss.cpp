#include "sgak/structure_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "sgak/error.hpp"
#include "sgak/gak.hpp"
#include "sgak/kernel.hpp"

namespace sgak {

namespace {

double label_entry(const PrefixView& a, const PrefixView& b, const KernelConfig& cfg) {
  if (a.source_doc_id == b.source_doc_id) return 1.0;
  if (a.slices.size() == 1 && b.slices.size() == 1) {
    const double cos = triple_cosine(a.slices.front(), b.slices.front(), cfg.kernel_mode);
    if (cfg.label_single_slice_mode == LabelSingleSliceMode::Cosine) return cos;
    return single_slice_gak(cos, cfg.delta);
  }
  KernelConfig gak_cfg = cfg;
  gak_cfg.normalize_gak = !cfg.raw_gak_labels;
  return gak_forward(a.as_sequence(), b.as_sequence(), gak_cfg);
}

void check_dims(std::span<const Vector> reps) {
  if (reps.empty()) throw Error(ErrorCode::kInvalidArgument, "no representation vectors");
  const auto dim = reps.front().size();
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (reps[i].size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("representation {} has dim {}, expected {}", i, reps[i].size(), dim));
    }
    if (!(reps[i].norm() > 0.0)) {
      throw Error(ErrorCode::kZeroVector, fmt::format("representation {} is zero", i));
    }
  }
}

std::vector<Vector> values_of(std::span<const RepresentationVector> reps) {
  std::vector<Vector> out;
  out.reserve(reps.size());
  for (const auto& r : reps) out.push_back(r.values);
  return out;
}

double loss_of(const Eigen::MatrixXd& weights, std::span<const Vector> hidden,
               const SimilarityMatrix& labels, std::vector<Vector>& projected) {
  projected.clear();
  for (const auto& h : hidden) projected.push_back(weights * h);
  for (const auto& z : projected) {
    if (!(z.norm() > 0.0)) return std::numeric_limits<double>::infinity();
  }
  return mse_loss(representation_matrix(projected), labels);
}

}  // namespace

SimilarityMatrix label_matrix(std::span<const PrefixView> views, const KernelConfig& cfg) {
  if (views.empty()) throw Error(ErrorCode::kInvalidArgument, "label matrix of an empty batch");
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(views.size());
  SimilarityMatrix out{MatrixKind::Label, Eigen::MatrixXd::Identity(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = label_entry(views[static_cast<std::size_t>(i)],
                                   views[static_cast<std::size_t>(j)], cfg);
      out.entries(i, j) = v;
      out.entries(j, i) = v;
    }
  }
  return out;
}

SimilarityMatrix representation_matrix(std::span<const Vector> reps) {
  check_dims(reps);
  const auto n = static_cast<Eigen::Index>(reps.size());
  std::vector<Vector> unit;
  unit.reserve(reps.size());
  for (const auto& r : reps) unit.push_back(r / r.norm());
  SimilarityMatrix out{MatrixKind::Representation, Eigen::MatrixXd::Identity(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = std::clamp(
          unit[static_cast<std::size_t>(i)].dot(unit[static_cast<std::size_t>(j)]), -1.0, 1.0);
      out.entries(i, j) = c;
      out.entries(j, i) = c;
    }
  }
  return out;
}

SimilarityMatrix representation_matrix(std::span<const RepresentationVector> reps) {
  const auto values = values_of(reps);
  return representation_matrix(std::span<const Vector>(values));
}

double mse_loss(const SimilarityMatrix& mr, const SimilarityMatrix& ml) {
  if (mr.kind != MatrixKind::Representation || ml.kind != MatrixKind::Label) {
    throw Error(ErrorCode::kInvalidArgument,
                "mse_loss expects (representation, label) matrices in that order");
  }
  if (mr.entries.rows() != ml.entries.rows() || mr.entries.cols() != ml.entries.cols()) {
    throw Error(ErrorCode::kSizeMismatch, fmt::format("{}x{} vs {}x{}", mr.entries.rows(),
                                                      mr.entries.cols(), ml.entries.rows(),
                                                      ml.entries.cols()));
  }
  if (mr.entries.rows() == 0) throw Error(ErrorCode::kSizeMismatch, "empty matrices");
  return (mr.entries - ml.entries).squaredNorm() / static_cast<double>(mr.entries.rows());
}

std::vector<Vector> loss_gradient(std::span<const Vector> reps, const SimilarityMatrix& ml) {
  const SimilarityMatrix mr = representation_matrix(reps);
  if (ml.entries.rows() != mr.entries.rows() || ml.entries.cols() != mr.entries.cols()) {
    throw Error(ErrorCode::kSizeMismatch, "label matrix does not match the batch size");
  }
  const auto n = static_cast<Eigen::Index>(reps.size());
  const Eigen::MatrixXd residual = mr.entries - ml.entries;
  std::vector<Vector> grads(reps.size(), Vector::Zero(reps.front().size()));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vector& u = reps[static_cast<std::size_t>(k)];
    const double u_norm = u.norm();
    const Vector u_hat = u / u_norm;
    Vector& g = grads[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == k) continue;  // the diagonal is the constant cos(u, u) = 1
      const Vector& v = reps[static_cast<std::size_t>(j)];
      const Vector v_hat = v / v.norm();
      // d cos(u, v) / du = (v_hat - cos * u_hat) / |u|
      const Vector dcos = (v_hat - mr.entries(k, j) * u_hat) / u_norm;
      g += (residual(k, j) + residual(j, k)) * dcos;
    }
    g *= 2.0 / static_cast<double>(n);
  }
  return grads;
}

std::vector<Vector> loss_gradient(std::span<const RepresentationVector> reps,
                                  const SimilarityMatrix& ml) {
  const auto values = values_of(reps);
  return loss_gradient(std::span<const Vector>(values), ml);
}

void TrainerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("learning_rate must be > 0, got {}", learning_rate));
  }
  if (steps < 1) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  if (input_dim < 1 || output_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("projector dims must be >= 1, got ({}, {})", input_dim, output_dim));
  }
}

Vector Projector::apply(const Vector& hidden) const {
  if (hidden.size() != weights.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("hidden dim {} does not match projector input {}", hidden.size(),
                            weights.cols()));
  }
  return normalized(weights * hidden);
}

TrainResult train_projector(std::span<const Vector> hidden, const SimilarityMatrix& labels,
                            const TrainerConfig& tcfg) {
  tcfg.validate();
  if (hidden.empty()) throw Error(ErrorCode::kInvalidArgument, "no hidden vectors");
  if (static_cast<Eigen::Index>(hidden.size()) != labels.size()) {
    throw Error(ErrorCode::kSizeMismatch,
                fmt::format("{} hidden vectors for a {}x{} label matrix", hidden.size(),
                            labels.size(), labels.size()));
  }
  for (const auto& h : hidden) {
    if (h.size() != tcfg.input_dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("hidden dim {} != input_dim {}", h.size(), tcfg.input_dim));
    }
  }

  std::mt19937_64 rng(tcfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(tcfg.input_dim)));
  Eigen::MatrixXd weights(tcfg.output_dim, tcfg.input_dim);
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < weights.cols(); ++c) weights(r, c) = normal(rng);
  }

  TrainResult result;
  std::vector<Vector> projected;
  double loss = loss_of(weights, hidden, labels, projected);
  if (!std::isfinite(loss)) {
    throw Error(ErrorCode::kDivergenceDetected, fmt::format("initial loss is {}", loss));
  }
  result.loss_trace.push_back(loss);

  std::vector<Vector> candidate;
  for (std::size_t step = 1; step <= tcfg.steps; ++step) {
    const auto grads = loss_gradient(std::span<const Vector>(projected), labels);
    Eigen::MatrixXd grad_w = Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
    for (std::size_t i = 0; i < hidden.size(); ++i) grad_w += grads[i] * hidden[i].transpose();

    double rate = tcfg.learning_rate;
    bool accepted = false;
    bool saw_finite = false;
    for (std::size_t halving = 0; halving <= tcfg.max_halvings; ++halving, rate *= 0.5) {
      const Eigen::MatrixXd trial = weights - rate * grad_w;
      const double trial_loss = loss_of(trial, hidden, labels, candidate);
      if (std::isfinite(trial_loss)) saw_finite = true;
      if (std::isfinite(trial_loss) && trial_loss <= loss) {
        weights = trial;
        loss = trial_loss;
        std::swap(projected, candidate);
        accepted = true;
        break;
      }
    }
    if (!accepted && !saw_finite) {
      throw Error(ErrorCode::kDivergenceDetected,
                  fmt::format("no finite loss after {} halvings at step {}; trace {}",
                              tcfg.max_halvings, step, result.loss_trace));
    }
    result.loss_trace.push_back(loss);
  }
  result.projector.weights = std::move(weights);
  return result;
}

TrainResult train_projector(std::span<const Vector> hidden, std::span<const PrefixView> views,
                            const KernelConfig& cfg, const TrainerConfig& tcfg) {
  if (hidden.size() != views.size()) {
    throw Error(ErrorCode::kSizeMismatch,
                fmt::format("{} hidden vectors for {} views", hidden.size(), views.size()));
  }
  tcfg.validate();
  return train_projector(hidden, label_matrix(views, cfg), tcfg);
}

}  // namespace sgak
