#include "vsum/skim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "vsum/error.hpp"
#include "vsum/rounding.hpp"

namespace vsum {

namespace {

constexpr const char* kModule = "skim";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

std::size_t total_length(const std::vector<Segment>& segments) {
  std::size_t total = 0;
  for (const auto& s : segments) total += s.length();
  return total;
}

}  // namespace

std::vector<Segment> merge_segments(std::vector<Segment> segments) {
  std::sort(segments.begin(), segments.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  std::vector<Segment> merged;
  for (const auto& s : segments) {
    if (!merged.empty() && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

std::vector<Segment> build_skims(std::span<const std::size_t> keyframes_original,
                                 std::size_t n_original, double src_fps, double window_sec) {
  if (keyframes_original.empty()) fail(ErrorKind::InvalidArgument, "no keyframes");
  if (!(src_fps > 0.0) || !(window_sec >= 0.0))
    fail(ErrorKind::InvalidArgument, "fps must be positive and window non-negative");
  const auto half = static_cast<std::size_t>(std::round(window_sec / 2.0 * src_fps));

  std::vector<Segment> raw;
  raw.reserve(keyframes_original.size());
  for (std::size_t o : keyframes_original) {
    if (o >= n_original) fail(ErrorKind::InvalidArgument, "keyframe beyond the last frame");
    raw.push_back({o > half ? o - half : 0, std::min(n_original, o + half + 1)});
  }
  return merge_segments(std::move(raw));
}

std::vector<Segment> build_skims(const KeyframeSet& keys, const SampledSequence& sampled,
                                 double window_sec) {
  std::vector<std::size_t> original;
  original.reserve(keys.indices.size());
  for (std::size_t j : keys.indices) original.push_back(sampled.sampled_indices().at(j));
  return build_skims(original, sampled.n_original(), sampled.src_fps(), window_sec);
}

std::size_t budget_frames(std::size_t n_original, double max_ratio) {
  return floor_count(max_ratio * static_cast<double>(n_original));
}

BudgetResult enforce_budget(std::vector<Segment> segments, std::size_t n_original,
                            double max_ratio, std::span<const std::size_t> keyframes_original) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].start >= segments[i].end || segments[i].end > n_original)
      fail(ErrorKind::InvalidArgument, "segment out of range");
    if (i > 0 && segments[i].start < segments[i - 1].end)
      fail(ErrorKind::SegmentOverlap, "segments must be sorted and disjoint");
  }
  std::vector<bool> key_mask(n_original, false);
  for (std::size_t k : keyframes_original) {
    if (k >= n_original) fail(ErrorKind::InvalidArgument, "keyframe beyond the last frame");
    key_mask[k] = true;
  }
  // keys_before[i] = number of keyframes in [0, i)
  std::vector<std::size_t> keys_before(n_original + 1, 0);
  for (std::size_t i = 0; i < n_original; ++i) keys_before[i + 1] = keys_before[i] + key_mask[i];
  const bool guard_keys = !keyframes_original.empty();
  auto is_key = [&](std::size_t i) { return static_cast<bool>(key_mask[i]); };

  // A segment is shrinkable when it holds a frame that may be dropped.
  auto shrinkable = [&](const Segment& s) {
    if (!guard_keys) return s.length() > 1;
    return s.length() > keys_before[s.end] - keys_before[s.start];
  };

  const std::size_t budget = budget_frames(n_original, max_ratio);
  std::size_t total = total_length(segments);
  BudgetResult result;

  while (total > budget) {
    std::size_t pick = segments.size();
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (!shrinkable(segments[i])) continue;
      if (pick == segments.size() || segments[i].length() > segments[pick].length()) pick = i;
    }
    if (pick == segments.size()) {
      result.overflow = true;
      break;
    }

    Segment& s = segments[pick];
    if (!guard_keys || !is_key(s.end - 1)) {
      --s.end;
    } else if (!is_key(s.start)) {
      ++s.start;
    } else {
      std::size_t drop = s.end - 1;
      while (is_key(drop)) --drop;
      const Segment tail{drop + 1, s.end};
      s.end = drop;
      segments.insert(segments.begin() + static_cast<std::ptrdiff_t>(pick) + 1, tail);
    }
    --total;
  }
  result.segments = std::move(segments);
  return result;
}

std::vector<bool> segments_to_mask(std::span<const Segment> segments, std::size_t n_original) {
  std::vector<bool> mask(n_original, false);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.start > s.end || s.end > n_original)
      fail(ErrorKind::InvalidArgument, "segment outside [0, n_original]");
    if (i > 0 && s.start < segments[i - 1].end)
      fail(ErrorKind::SegmentOverlap, "segment " + std::to_string(i) + " overlaps its predecessor");
    for (std::size_t f = s.start; f < s.end; ++f) mask[f] = true;
  }
  return mask;
}

std::vector<Segment> mask_to_segments(const std::vector<bool>& mask) {
  std::vector<Segment> out;
  for (std::size_t i = 0; i < mask.size();) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < mask.size() && mask[j]) ++j;
    out.push_back({i, j});
    i = j;
  }
  return out;
}

void write_mask(const std::filesystem::path& path, const std::vector<bool>& mask) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  std::string text;
  text.reserve(mask.size() * 2);
  for (bool b : mask) {
    text.push_back(b ? '1' : '0');
    text.push_back('\n');
  }
  out << text;
  if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

std::vector<bool> read_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::vector<bool> mask;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "1") {
      mask.push_back(true);
    } else if (line == "0") {
      mask.push_back(false);
    } else {
      fail(ErrorKind::UnsupportedFormat,
           path.filename().string() + ":" + std::to_string(line_no) + ": expected '0' or '1'");
    }
  }
  return mask;
}

SummarySelection summarize_selection(const KeyframeSet& keys, const SampledSequence& sampled,
                                     double window_sec, double max_ratio) {
  SummarySelection sel;
  for (std::size_t j : keys.indices) sel.keyframes_original.push_back(sampled.sampled_indices().at(j));
  auto skims = build_skims(sel.keyframes_original, sampled.n_original(), sampled.src_fps(), window_sec);
  auto budgeted = enforce_budget(std::move(skims), sampled.n_original(), max_ratio, sel.keyframes_original);
  sel.segments = std::move(budgeted.segments);
  sel.budget_overflow = budgeted.overflow;
  sel.mask = segments_to_mask(sel.segments, sampled.n_original());
  return sel;
}

}  // namespace vsum
