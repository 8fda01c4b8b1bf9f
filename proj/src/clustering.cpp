#include "vsum/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vsum/error.hpp"
#include "vsum/rounding.hpp"

namespace vsum {

namespace {

constexpr const char* kModule = "clustering";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

void check_fit_args(const FeatureMatrix& x, std::size_t k) {
  if (k == 0) fail(ErrorKind::InvalidArgument, "k must be >= 1");
  if (x.dim() == 0) fail(ErrorKind::InvalidArgument, "features must have dim >= 1");
  if (k > x.rows())
    fail(ErrorKind::InvalidArgument,
         "k = " + std::to_string(k) + " exceeds " + std::to_string(x.rows()) + " rows");
}

std::span<const double> center_of(const std::vector<double>& centers, std::size_t c,
                                  std::size_t dim) {
  return std::span<const double>(centers).subspan(c * dim, dim);
}

std::vector<double> kmeans_plus_plus(const FeatureMatrix& x, std::size_t k, SeededRng& rng) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.dim();
  std::vector<double> centers;
  centers.reserve(k * dim);

  auto add_center = [&](std::size_t i) {
    const auto r = x.row(i);
    centers.insert(centers.end(), r.begin(), r.end());
  };

  add_center(rng.index(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i), center_of(centers, 0, dim));

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double cum = 0.0;
      pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // u rounded onto the total; take the last candidate
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      pick = rng.index(n);  // every point coincides with a center already
    }
    add_center(pick);
    const auto fresh = center_of(centers, c, dim);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(x.row(i), fresh));
  }
  return centers;
}

void assign_nearest(const FeatureMatrix& x, const std::vector<double>& centers, std::size_t k,
                    std::vector<std::size_t>& assignments) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = squared_distance(x.row(i), center_of(centers, c, x.dim()));
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    assignments[i] = best_c;
  }
}

/// Moves, for each empty cluster, the point farthest from its own center into
/// it. Donors must keep at least one member.
void repair_empty_clusters(const FeatureMatrix& x, std::vector<double>& centers, std::size_t k,
                           std::vector<std::size_t>& assignments) {
  const std::size_t dim = x.dim();
  std::vector<std::size_t> counts(k, 0);
  for (auto a : assignments) ++counts[a];

  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    double far = -1.0;
    std::size_t far_i = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (counts[assignments[i]] < 2) continue;
      const double d = squared_distance(x.row(i), center_of(centers, assignments[i], dim));
      if (d > far) {
        far = d;
        far_i = i;
      }
    }
    --counts[assignments[far_i]];
    assignments[far_i] = c;
    ++counts[c];
    const auto r = x.row(far_i);
    std::copy(r.begin(), r.end(), centers.begin() + static_cast<std::ptrdiff_t>(c * dim));
  }
}

void update_means(const FeatureMatrix& x, const std::vector<std::size_t>& assignments,
                  std::size_t k, std::vector<double>& centers) {
  const std::size_t dim = x.dim();
  std::vector<double> sums(k * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    double* s = &sums[assignments[i] * dim];
    for (std::size_t d = 0; d < dim; ++d) s[d] += r[d];
    ++counts[assignments[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t d = 0; d < dim; ++d)
      centers[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
  }
}

struct LloydRun {
  std::vector<double> centers;
  std::vector<std::size_t> assignments;
  double wcss = 0.0;
  std::vector<double> trace;
  std::size_t iterations = 0;
};

LloydRun run_lloyd(const FeatureMatrix& x, std::size_t k, std::uint64_t seed,
                   const KMeansOptions& options) {
  SeededRng rng(seed);
  LloydRun run;
  run.centers = kmeans_plus_plus(x, k, rng);
  run.assignments.assign(x.rows(), 0);
  assign_nearest(x, run.centers, k, run.assignments);
  repair_empty_clusters(x, run.centers, k, run.assignments);
  run.wcss = compute_wcss(x, run.centers, run.assignments);
  run.trace.push_back(run.wcss);

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    const double prev = run.wcss;
    update_means(x, run.assignments, k, run.centers);
    assign_nearest(x, run.centers, k, run.assignments);
    repair_empty_clusters(x, run.centers, k, run.assignments);
    run.wcss = compute_wcss(x, run.centers, run.assignments);
    run.trace.push_back(run.wcss);
    ++run.iterations;
    if (prev <= 0.0 || (prev - run.wcss) < options.tol * prev) break;
  }
  return run;
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : engine_(seed) {}

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t SeededRng::index(std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

double compute_wcss(const FeatureMatrix& x, std::span<const double> centers,
                    std::span<const std::size_t> assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    total += squared_distance(x.row(i), centers.subspan(assignments[i] * x.dim(), x.dim()));
  return total;
}

KMeansModel kmeans_fit(const FeatureMatrix& x, std::size_t k, std::uint64_t seed,
                       const KMeansOptions& options) {
  check_fit_args(x, k);
  const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);

  LloydRun best;
  std::size_t best_r = 0;
  for (std::size_t r = 0; r < restarts; ++r) {
    LloydRun run = run_lloyd(x, k, seed + r, options);
    if (r == 0 || run.wcss < best.wcss) {
      best = std::move(run);
      best_r = r;
    }
  }

  KMeansModel model;
  model.k = k;
  model.dim = x.dim();
  model.centers = std::move(best.centers);
  model.assignments = std::move(best.assignments);
  model.wcss = best.wcss;
  model.seed = seed;
  model.iterations_run = best.iterations;
  model.best_restart = best_r;
  model.wcss_trace = std::move(best.trace);
  return model;
}

std::vector<std::size_t> GmmModel::hard_assignments() const {
  const std::size_t n = k == 0 ? 0 : responsibilities.size() / k;
  std::vector<std::size_t> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = responsibility_row(i);
    out[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

namespace {

/// Fills `resp` (N x k) with posteriors and returns the total log-likelihood.
double e_step(const FeatureMatrix& x, std::size_t k, std::span<const double> weights,
              std::span<const double> means, std::span<const double> variances,
              std::vector<double>* resp) {
  const std::size_t dim = x.dim();
  std::vector<double> log_norm(k);
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += std::log(2.0 * std::numbers::pi * variances[c * dim + d]);
    log_norm[c] = std::log(weights[c]) - 0.5 * s;
  }

  std::vector<double> log_p(k);
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double q = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = r[d] - means[c * dim + d];
        q += diff * diff / variances[c * dim + d];
      }
      log_p[c] = log_norm[c] - 0.5 * q;
      top = std::max(top, log_p[c]);
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(log_p[c] - top);
    total += top + std::log(sum);

    if (resp) {
      double* row = &(*resp)[i * k];
      double norm = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        row[c] = std::exp(log_p[c] - top) / sum;
        norm += row[c];
      }
      for (std::size_t c = 0; c < k; ++c) row[c] /= norm;
    }
  }
  return total;
}

void m_step(const FeatureMatrix& x, std::size_t k, const std::vector<double>& resp,
            std::vector<double>& weights, std::vector<double>& means,
            std::vector<double>& variances) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.dim();
  // Below this mass a component keeps its previous mean and variance.
  constexpr double kMinMass = 1e-300;

  double weight_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass += resp[i * k + c];
    weights[c] = std::max(mass, kMinMass) / static_cast<double>(n);
    weight_sum += weights[c];
    if (mass < kMinMass) continue;

    for (std::size_t d = 0; d < dim; ++d) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += resp[i * k + c] * x.at(i, d);
      means[c * dim + d] = s / mass;
    }
    for (std::size_t d = 0; d < dim; ++d) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = x.at(i, d) - means[c * dim + d];
        s += resp[i * k + c] * diff * diff;
      }
      variances[c * dim + d] = std::max(s / mass, GmmModel::kVarianceFloor);
    }
  }
  for (auto& w : weights) w /= weight_sum;
}

}  // namespace

double gmm_log_likelihood(const FeatureMatrix& x, std::span<const double> weights,
                          std::span<const double> means, std::span<const double> variances) {
  return e_step(x, weights.size(), weights, means, variances, nullptr);
}

GmmModel gmm_fit(const FeatureMatrix& x, std::size_t k, std::uint64_t seed,
                 const GmmOptions& options) {
  check_fit_args(x, k);
  const std::size_t n = x.rows();
  const std::size_t dim = x.dim();

  KMeansOptions km_options;
  km_options.restarts = options.kmeans_restarts;
  const KMeansModel init = kmeans_fit(x, k, seed, km_options);

  GmmModel model;
  model.k = k;
  model.dim = dim;
  model.seed = seed;
  model.weights.assign(k, 1.0 / static_cast<double>(k));
  model.means = init.centers;

  std::vector<double> pooled(dim, 0.0);
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x.at(i, d);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x.at(i, d) - mean) * (x.at(i, d) - mean);
    pooled[d] = std::max(var / static_cast<double>(n), GmmModel::kVarianceFloor);
  }
  model.variances.resize(k * dim);
  for (std::size_t c = 0; c < k; ++c)
    std::copy(pooled.begin(), pooled.end(), model.variances.begin() + static_cast<std::ptrdiff_t>(c * dim));

  model.responsibilities.assign(n * k, 0.0);
  const std::size_t max_iter = std::max<std::size_t>(options.max_iter, 1);
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double ll = e_step(x, k, model.weights, model.means, model.variances, &model.responsibilities);
    model.loglik_trace.push_back(ll);
    if (it > 0) {
      const double prev = model.loglik_trace[it - 1];
      const double scale = std::abs(ll) > 0.0 ? std::abs(ll) : 1.0;
      if (std::abs(ll - prev) / scale < options.tol) break;
    }
    if (it + 1 == max_iter) break;
    m_step(x, k, model.responsibilities, model.weights, model.means, model.variances);
  }
  return model;
}

std::size_t choose_k(std::size_t n_sampled, double duration_sec, KMode mode, double ratio,
                     double skim_sec) {
  if (n_sampled == 0) fail(ErrorKind::InvalidArgument, "n_sampled must be >= 1");
  if (!(duration_sec > 0.0)) fail(ErrorKind::InvalidArgument, "duration must be positive");
  if (!(ratio > 0.0)) fail(ErrorKind::InvalidArgument, "ratio must be positive");
  if (!(skim_sec > 0.0)) fail(ErrorKind::InvalidArgument, "skim length must be positive");

  std::size_t k = 0;
  switch (mode) {
    case KMode::DurationBudget:
      k = floor_count(ratio * duration_sec / skim_sec);
      break;
    case KMode::FrameFraction:
      k = static_cast<std::size_t>(std::round(ratio * static_cast<double>(n_sampled)));
      break;
  }
  return std::clamp<std::size_t>(k, 1, n_sampled);
}

}  // namespace vsum
