#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vsum/clustering.hpp"
#include "vsum/features.hpp"

namespace vsum {

enum class KeyframeSource { Uniform, HistThreshold, HogThreshold, ClusterCenter };

std::string_view to_string(KeyframeSource s);

/// Keyframe indices in sampled-frame space, strictly increasing.
struct KeyframeSet {
  std::vector<std::size_t> indices;
  KeyframeSource source = KeyframeSource::Uniform;
  /// Only for ClusterCenter: keyframe index -> cluster id.
  std::optional<std::map<std::size_t, std::size_t>> cluster_of;
};

KeyframeSet uniform_keyframes(std::size_t n_frames, std::size_t every_k = 7);

/// Frame 0, plus every frame whose histogram differs from its predecessor's
/// by at least `thresh`.
KeyframeSet hist_threshold_keyframes(std::span<const GrayHistogram> hists, double thresh = 0.5);

/// Frame 0, plus the successors of the ceil(budget_ratio * N) largest
/// consecutive L2 jumps (ties toward the lower index).
KeyframeSet hog_threshold_keyframes(const FeatureMatrix& hog, double budget_ratio = 0.15);

/// One keyframe per non-empty cluster: the member nearest its center.
///
/// When several members are exactly equally near, the lower median of the
/// tied indices is taken, so a run of identical frames is represented by
/// its middle rather than its first frame. With two tied members this is
/// the lower index.
KeyframeSet nearest_to_center(const FeatureMatrix& x, std::span<const double> centers,
                              std::size_t k, std::span<const std::size_t> assignments);
KeyframeSet nearest_to_center(const FeatureMatrix& x, const KMeansModel& model);
KeyframeSet nearest_to_center(const FeatureMatrix& x, const GmmModel& model);

}  // namespace vsum
