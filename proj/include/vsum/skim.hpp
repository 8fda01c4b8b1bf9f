#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "vsum/frame_ingest.hpp"
#include "vsum/selection.hpp"

namespace vsum {

/// Half-open range [start, end) of original frames.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  bool contains(std::size_t i) const noexcept { return i >= start && i < end; }
  bool operator==(const Segment&) const = default;
};

struct BudgetResult {
  std::vector<Segment> segments;
  /// The keyframes alone exceed the budget, so it could not be met.
  bool overflow = false;
};

struct SummarySelection {
  std::vector<Segment> segments;
  std::vector<bool> mask;
  std::vector<std::size_t> keyframes_original;
  bool budget_overflow = false;
};

/// Sorts and merges overlapping or touching segments.
std::vector<Segment> merge_segments(std::vector<Segment> segments);

/// Centers a window of +/- round(window_sec / 2 * fps) frames on each keyframe.
std::vector<Segment> build_skims(const KeyframeSet& keys, const SampledSequence& sampled,
                                 double window_sec = 1.8);
/// Same, from original keyframe indices.
std::vector<Segment> build_skims(std::span<const std::size_t> keyframes_original,
                                 std::size_t n_original, double src_fps, double window_sec = 1.8);

/// Trims the longest segment one frame at a time until the total is at most
/// floor(max_ratio * n_original). Frames come off the end first; keyframes
/// are never removed, so once the end reaches a keyframe the start is trimmed,
/// and after that the last non-keyframe frame inside the segment is dropped
/// (splitting it). Without keyframes a segment never drops below one frame.
BudgetResult enforce_budget(std::vector<Segment> segments, std::size_t n_original,
                            double max_ratio = 0.15,
                            std::span<const std::size_t> keyframes_original = {});

std::size_t budget_frames(std::size_t n_original, double max_ratio);

std::vector<bool> segments_to_mask(std::span<const Segment> segments, std::size_t n_original);
/// Maximal runs of true values.
std::vector<Segment> mask_to_segments(const std::vector<bool>& mask);

/// One '0'/'1' character per line, newline-terminated.
void write_mask(const std::filesystem::path& path, const std::vector<bool>& mask);
std::vector<bool> read_mask(const std::filesystem::path& path);

/// build_skims + enforce_budget + segments_to_mask.
SummarySelection summarize_selection(const KeyframeSet& keys, const SampledSequence& sampled,
                                     double window_sec = 1.8, double max_ratio = 0.15);

}  // namespace vsum
