#include "vsum/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vsum/error.hpp"
#include "vsum/rounding.hpp"

namespace vsum {

namespace {

constexpr const char* kModule = "selection";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

}  // namespace

std::string_view to_string(KeyframeSource s) {
  switch (s) {
    case KeyframeSource::Uniform: return "uniform";
    case KeyframeSource::HistThreshold: return "hist_threshold";
    case KeyframeSource::HogThreshold: return "hog_threshold";
    case KeyframeSource::ClusterCenter: return "cluster_center";
  }
  return "unknown";
}

KeyframeSet uniform_keyframes(std::size_t n_frames, std::size_t every_k) {
  if (n_frames == 0) fail(ErrorKind::InvalidArgument, "n_frames must be >= 1");
  if (every_k == 0) fail(ErrorKind::InvalidArgument, "every_k must be >= 1");
  KeyframeSet out;
  out.source = KeyframeSource::Uniform;
  for (std::size_t i = 0; i < n_frames; i += every_k) out.indices.push_back(i);
  return out;
}

KeyframeSet hist_threshold_keyframes(std::span<const GrayHistogram> hists, double thresh) {
  if (hists.empty()) fail(ErrorKind::InvalidArgument, "need at least one histogram");
  KeyframeSet out;
  out.source = KeyframeSource::HistThreshold;
  out.indices.push_back(0);
  for (std::size_t i = 0; i + 1 < hists.size(); ++i) {
    if (hist_dissimilarity(hists[i], hists[i + 1]) >= thresh) out.indices.push_back(i + 1);
  }
  return out;
}

KeyframeSet hog_threshold_keyframes(const FeatureMatrix& hog, double budget_ratio) {
  const std::size_t n = hog.rows();
  if (n < 2) fail(ErrorKind::InvalidArgument, "need at least two frames");
  if (!(budget_ratio >= 0.0)) fail(ErrorKind::InvalidArgument, "budget ratio must be >= 0");

  std::vector<double> jumps(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    jumps[i] = std::sqrt(squared_distance(hog.row(i), hog.row(i + 1)));

  std::vector<std::size_t> order(n - 1);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return jumps[a] > jumps[b]; });
  const std::size_t take =
      std::min(ceil_count(budget_ratio * static_cast<double>(n)), n - 1);

  KeyframeSet out;
  out.source = KeyframeSource::HogThreshold;
  out.indices.push_back(0);
  for (std::size_t j = 0; j < take; ++j) out.indices.push_back(order[j] + 1);
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

KeyframeSet nearest_to_center(const FeatureMatrix& x, std::span<const double> centers,
                              std::size_t k, std::span<const std::size_t> assignments) {
  if (assignments.size() != x.rows())
    fail(ErrorKind::RowCountMismatch, "model covers " + std::to_string(assignments.size()) +
                                          " rows, matrix has " + std::to_string(x.rows()));
  if (centers.size() != k * x.dim())
    fail(ErrorKind::InvalidArgument, "center dimension does not match the matrix");

  // Per cluster: best distance and every row achieving it, in ascending order.
  std::vector<double> best(k, INFINITY);
  std::vector<std::vector<std::size_t>> tied(k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t c = assignments[i];
    if (c >= k) fail(ErrorKind::InvalidArgument, "assignment out of range");
    const double d = squared_distance(x.row(i), centers.subspan(c * x.dim(), x.dim()));
    if (d < best[c]) {
      best[c] = d;
      tied[c].assign(1, i);
    } else if (d == best[c]) {
      tied[c].push_back(i);
    }
  }

  KeyframeSet out;
  out.source = KeyframeSource::ClusterCenter;
  out.cluster_of.emplace();
  for (std::size_t c = 0; c < k; ++c) {
    if (tied[c].empty()) continue;
    const std::size_t pick = tied[c][(tied[c].size() - 1) / 2];
    out.indices.push_back(pick);
    (*out.cluster_of)[pick] = c;
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

KeyframeSet nearest_to_center(const FeatureMatrix& x, const KMeansModel& model) {
  return nearest_to_center(x, model.centers, model.k, model.assignments);
}

KeyframeSet nearest_to_center(const FeatureMatrix& x, const GmmModel& model) {
  const auto hard = model.hard_assignments();
  return nearest_to_center(x, model.means, model.k, hard);
}

}  // namespace vsum
