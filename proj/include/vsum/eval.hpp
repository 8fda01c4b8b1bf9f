#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace vsum {

/// U annotators x N frames of selected/not-selected flags.
struct AnnotationSet {
  std::size_t users = 0;
  std::size_t n_frames = 0;
  std::vector<std::vector<bool>> masks;  // one row per user
  std::string video_id;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct UserScore {
  std::size_t user = 0;  // 1-based, matching the user_<n> CSV header
  Prf score;
};

struct EvalReport {
  std::vector<UserScore> per_user;
  double f_mean = 0.0;
  double f_max = 0.0;
  std::string method;
  std::string video_id;
};

/// Reads "frame,user_1,...,user_U" CSV; a cell marks the frame selected when > 0.
/// Pass n_frames_expected = 0 to accept any row count.
AnnotationSet load_annotations(const std::filesystem::path& path, std::size_t n_frames_expected,
                               std::string video_id = {});

Prf prf(const std::vector<bool>& pred, const std::vector<bool>& truth);

EvalReport evaluate(const std::vector<bool>& pred, const AnnotationSet& ann, std::string method);

/// Each user's mean f1 against every other user (leave-one-out).
std::vector<double> human_leave_one_out(const AnnotationSet& ann);
/// Mean of human_leave_one_out.
double human_baseline(const AnnotationSet& ann);

}  // namespace vsum
