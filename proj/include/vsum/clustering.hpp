#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vsum/features.hpp"

namespace vsum {

/// Deterministic PRNG used for all seeding: std::mt19937_64 (a fully
/// specified algorithm) with doubles built from the top 53 bits, so draws
/// match across platforms and standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

struct KMeansModel {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centers;  // k x dim, row-major
  std::vector<std::size_t> assignments;
  double wcss = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations_run = 0;
  std::size_t best_restart = 0;
  /// wcss after seeding, then after every Lloyd iteration, for the chosen restart.
  std::vector<double> wcss_trace;

  std::span<const double> center(std::size_t c) const {
    return std::span<const double>(centers).subspan(c * dim, dim);
  }
};

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-6;
};

struct GmmModel {
  static constexpr double kVarianceFloor = 1e-6;

  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<double> means;      // k x dim
  std::vector<double> variances;  // k x dim, diagonal
  std::vector<double> responsibilities;  // N x k
  std::vector<double> loglik_trace;
  std::uint64_t seed = 0;

  std::span<const double> mean(std::size_t c) const {
    return std::span<const double>(means).subspan(c * dim, dim);
  }
  std::span<const double> responsibility_row(std::size_t i) const {
    return std::span<const double>(responsibilities).subspan(i * k, k);
  }
  /// argmax responsibility per row, lowest component on ties.
  std::vector<std::size_t> hard_assignments() const;
};

struct GmmOptions {
  std::size_t max_iter = 200;
  double tol = 1e-6;
  std::size_t kmeans_restarts = 10;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Sum of squared distances from each row to its assigned center.
double compute_wcss(const FeatureMatrix& x, std::span<const double> centers,
                    std::span<const std::size_t> assignments);

/// Best-of-restarts Lloyd with k-means++ seeding; restart r draws from seed + r.
KMeansModel kmeans_fit(const FeatureMatrix& x, std::size_t k, std::uint64_t seed,
                       const KMeansOptions& options = {});

/// Total log-likelihood of `x` under diagonal-covariance mixture parameters.
double gmm_log_likelihood(const FeatureMatrix& x, std::span<const double> weights,
                          std::span<const double> means, std::span<const double> variances);

/// EM for a diagonal mixture, initialized from kmeans_fit centers.
GmmModel gmm_fit(const FeatureMatrix& x, std::size_t k, std::uint64_t seed,
                 const GmmOptions& options = {});

enum class KMode { DurationBudget, FrameFraction };

std::size_t choose_k(std::size_t n_sampled, double duration_sec, KMode mode, double ratio = 0.15,
                     double skim_sec = 1.8);

}  // namespace vsum
