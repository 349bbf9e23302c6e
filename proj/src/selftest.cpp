#include "sgak/selftest.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "sgak/kernel.hpp"
#include "sgak/random.hpp"
#include "sgak/structure_loss.hpp"

namespace sgak {

namespace {

constexpr double kDpTolerance = 1e-10;
constexpr double kClosedFormTolerance = 1e-12;
constexpr double kGramTolerance = 1e-8;
constexpr double kGradientTolerance = 1e-5;
constexpr double kFdStep = 1e-5;

// Per-suite seeds derived from the base seed so suites stay independent.
std::uint64_t suite_seed(std::uint64_t seed, std::uint64_t salt) {
  return seed * 0x9E3779B97F4A7C15ull + salt;
}

}  // namespace

std::uint64_t delannoy(std::size_t a, std::size_t b) {
  std::vector<std::vector<std::uint64_t>> d(a + 1, std::vector<std::uint64_t>(b + 1, 1));
  for (std::size_t i = 1; i <= a; ++i) {
    for (std::size_t j = 1; j <= b; ++j) d[i][j] = d[i - 1][j] + d[i][j - 1] + d[i - 1][j - 1];
  }
  return d[a][b];
}

std::vector<std::string> selftest_suite_names() {
  return {"dp_vs_bruteforce", "alignment_counts", "closed_form_sweep", "gram_spectra",
          "gradient_fd"};
}

SuiteResult suite_dp_vs_bruteforce(const SelftestOptions& options, std::size_t max_len,
                                   std::size_t instances) {
  SliceSampler sampler(suite_seed(options.seed, 1), 6, 6);
  KernelConfig cfg;
  cfg.delta = options.delta;
  double worst = 0.0;
  std::string where;
  for (std::size_t n = 1; n <= max_len; ++n) {
    for (std::size_t m = 1; m <= max_len; ++m) {
      for (std::size_t t = 0; t < instances; ++t) {
        const auto x = sampler.composite_sequence("x", n);
        const auto y = sampler.composite_sequence("y", m);
        const double dp = detail::gak_forward_with(x, y, cfg, options.faults);
        const double oracle = gak_bruteforce(x, y, cfg);
        const double rel = std::abs(dp - oracle) / std::abs(oracle);
        if (!(rel <= worst)) {
          worst = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
          where = fmt::format("n={} m={} instance={}", n, m, t);
        }
      }
    }
  }
  return {"dp_vs_bruteforce", worst <= kDpTolerance, worst, "worst at " + where};
}

SuiteResult suite_alignment_counts(std::size_t max_len) {
  double mismatches = 0.0;
  std::string detail = "all counts match";
  for (std::size_t n = 1; n <= max_len; ++n) {
    for (std::size_t m = 1; m <= max_len; ++m) {
      const auto paths = enumerate_alignments(n, m);
      const bool all_valid = std::all_of(paths.begin(), paths.end(),
                                         [&](const AlignmentPath& p) { return p.is_valid(n, m); });
      if (paths.size() != delannoy(n - 1, m - 1) || !all_valid) {
        mismatches += 1.0;
        detail = fmt::format("n={} m={}: {} paths, expected {}", n, m, paths.size(),
                             delannoy(n - 1, m - 1));
      }
    }
  }
  return {"alignment_counts", mismatches == 0.0, mismatches, detail};
}

SuiteResult suite_closed_form_sweep(const SelftestOptions& options) {
  constexpr std::size_t kPoints = 201;
  double worst = 0.0;
  bool monotone = true;
  bool exact_at_one = true;
  std::string detail = "sweeps strictly increasing";
  for (const double delta : {0.5, 1.0, 2.0}) {
    KernelConfig cfg;
    cfg.delta = delta;
    double previous = -1.0;
    for (std::size_t p = 0; p < kPoints; ++p) {
      const double angle = M_PI * (1.0 - static_cast<double>(p) / (kPoints - 1));
      // Unit vectors at the given angle; cosine goes from -1 to 1.
      Vector a(2);
      a << 1.0, 0.0;
      Vector b(2);
      b << std::cos(angle), std::sin(angle);
      const double cos = std::clamp(a.dot(b), -1.0, 1.0);
      const double closed = single_slice_gak(cos, delta);
      const InterleavedSequence x{"x", {SliceEmbedding::atomic(Modality::Text, a)}};
      const InterleavedSequence y{"y", {SliceEmbedding::atomic(Modality::Text, b)}};
      const double dp = detail::gak_forward_with(x, y, cfg, options.faults);
      worst = std::max(worst, std::abs(closed - dp));
      if (!(closed > previous)) {
        monotone = false;
        detail = fmt::format("not increasing at delta={} point={}", delta, p);
      }
      previous = closed;
    }
    if (single_slice_gak(1.0, delta) != 1.0) {
      exact_at_one = false;
      detail = fmt::format("cos=1 gives {} at delta={}", single_slice_gak(1.0, delta), delta);
    }
  }
  return {"closed_form_sweep", monotone && exact_at_one && worst <= kClosedFormTolerance, worst,
          detail};
}

SuiteResult suite_gram_spectra(const SelftestOptions& options, std::size_t sets, std::size_t size) {
  SliceSampler sampler(suite_seed(options.seed, 4), 16, 16);
  const double s = sigma(1, 1, options.delta);
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < sets; ++t) {
    std::vector<SliceEmbedding> slices;
    for (std::size_t i = 0; i < size; ++i) slices.push_back(sampler.composite());
    const auto n = static_cast<Eigen::Index>(size);
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        gram(i, j) = local_kernel(slices[static_cast<std::size_t>(i)],
                                  slices[static_cast<std::size_t>(j)], s);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, solver.eigenvalues().minCoeff());
  }
  const double violation = std::max(0.0, -min_eig);
  return {"gram_spectra", min_eig >= -kGramTolerance, violation,
          fmt::format("min eigenvalue {:.6e}", min_eig)};
}

SuiteResult suite_gradient_fd(const SelftestOptions& options, std::size_t instances) {
  SliceSampler sampler(suite_seed(options.seed, 5), 1, 1);
  auto& rng = sampler.engine();
  double worst = 0.0;
  std::string where;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const Eigen::Index dim = std::uniform_int_distribution<Eigen::Index>(2, 16)(rng);
    std::vector<Vector> reps;
    for (std::size_t i = 0; i < n; ++i) reps.push_back(sampler.unit(dim));
    SimilarityMatrix labels{MatrixKind::Label, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                                         static_cast<Eigen::Index>(n))};
    std::uniform_real_distribution<double> target(-0.5, 1.0);
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
      for (Eigen::Index j = i + 1; j < labels.size(); ++j) {
        labels.entries(i, j) = labels.entries(j, i) = target(rng);
      }
    }
    const auto analytic = loss_gradient(std::span<const Vector>(reps), labels);
    auto loss_at = [&](const std::vector<Vector>& r) {
      return mse_loss(representation_matrix(std::span<const Vector>(r)), labels);
    };
    double diff2 = 0.0;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        auto plus = reps;
        auto minus = reps;
        plus[i][c] += kFdStep;
        minus[i][c] -= kFdStep;
        const double fd = (loss_at(plus) - loss_at(minus)) / (2.0 * kFdStep);
        diff2 += (fd - analytic[i][c]) * (fd - analytic[i][c]);
        norm2 += fd * fd;
      }
    }
    const double rel = std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-12);
    if (!(rel <= worst)) {
      worst = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
      where = fmt::format("instance={} n={} dim={}", t, n, dim);
    }
  }
  return {"gradient_fd", worst <= kGradientTolerance, worst, "worst at " + where};
}

std::vector<SuiteResult> run_selftest(const SelftestOptions& options) {
  return {suite_dp_vs_bruteforce(options), suite_alignment_counts(),
          suite_closed_form_sweep(options), suite_gram_spectra(options),
          suite_gradient_fd(options)};
}

}  // namespace sgak
