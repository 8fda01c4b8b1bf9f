#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vsum/clustering.hpp"
#include "vsum/error.hpp"
#include "vsum/eval.hpp"
#include "vsum/frame_ingest.hpp"
#include "vsum/selection.hpp"
#include "vsum/skim.hpp"

namespace vsum {

enum class Method { Uniform, Histogram, Hog, VsummKmeans, VsummGmm, CnnKmeans, CnnGmm };

std::string_view to_string(Method m);
std::string_view to_string(KMode m);

struct PipelineConfig {
  std::filesystem::path input_dir;
  double src_fps = 0.0;
  double sample_fps = 5.0;
  Method method = Method::VsummKmeans;
  std::optional<std::filesystem::path> embeddings_path;
  double ratio = 0.15;
  double skim_seconds = 1.8;
  KMode k_mode = KMode::DurationBudget;
  /// Overrides choose_k for the clustering methods.
  std::optional<std::size_t> k;
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
  std::size_t uniform_every = 7;
  double hist_threshold = 0.5;
  std::filesystem::path output_dir;
  std::string video_id;
};

/// Defaults overlaid with `doc`. Unknown keys and bad values throw ConfigInvalid.
PipelineConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const PipelineConfig& config);
/// Throws ConfigInvalid on the first violated constraint.
void validate(const PipelineConfig& config, bool require_output_dir = true);

struct SummaryResult {
  KeyframeSet keys;
  SummarySelection selection;
  nlohmann::json model;
};

/// Runs the whole method on frames already in memory; writes nothing.
SummaryResult summarize(const PipelineConfig& config, const FrameSequence& frames);

/// Loads the frames, summarizes, and writes mask.txt, keyframes.txt,
/// segments.json, and model.json into config.output_dir.
SummaryResult run_summarize(const PipelineConfig& config);

nlohmann::json to_json(const EvalReport& report);

inline constexpr std::string_view kTableHeader = "video,method,f_mean,f_max";
inline constexpr std::string_view kHumanMethod = "Human (Avg.)";

/// Scores a mask file and appends "video,method,f_mean,f_max" to `table_csv`
/// (created with a header when missing). With `report_dir`, also writes
/// <video>__<method>.json there. Nothing is written on error.
EvalReport run_evaluate(const std::filesystem::path& mask_path,
                        const std::filesystem::path& annotations_path, const std::string& method,
                        const std::filesystem::path& table_csv,
                        const std::optional<std::filesystem::path>& report_dir = std::nullopt,
                        const std::string& video_id = {});

/// Appends the leave-one-out human row; f_max is the best single annotator.
double run_baseline(const std::filesystem::path& annotations_path,
                    const std::filesystem::path& table_csv, const std::string& video_id = {});

/// Pivots table rows into one row per video and one column per method,
/// closed by a "mean" row computed over the videos present in each column.
std::string build_report(std::span<const std::filesystem::path> tables);

/// 1 for usage and configuration problems, 2 for data problems.
int exit_code_for(ErrorKind kind);

}  // namespace vsum
