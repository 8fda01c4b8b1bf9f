// vsum: keyframe/skim video summarization and SumMe-style scoring.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vsum/pipeline.hpp"

namespace {

struct SummarizeFlags {
  std::string config_path;
  std::optional<std::string> input_dir, method, embeddings_path, k_mode, output_dir, video_id;
  std::optional<double> src_fps, sample_fps, ratio, skim_seconds, hist_threshold;
  std::optional<std::size_t> k, restarts, uniform_every;
  std::optional<std::uint64_t> seed;
};

template <typename T>
void overlay(nlohmann::json& doc, const char* key, const std::optional<T>& value) {
  if (value) doc[key] = *value;
}

vsum::PipelineConfig resolve_config(const SummarizeFlags& f) {
  nlohmann::json doc = nlohmann::json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw vsum::Error(vsum::ErrorKind::ConfigInvalid, "cli", "cannot open " + f.config_path);
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw vsum::Error(vsum::ErrorKind::ConfigInvalid, "cli", f.config_path + ": " + e.what());
    }
    if (!doc.is_object())
      throw vsum::Error(vsum::ErrorKind::ConfigInvalid, "cli", "config must be a JSON object");
  }
  overlay(doc, "input_dir", f.input_dir);
  overlay(doc, "src_fps", f.src_fps);
  overlay(doc, "sample_fps", f.sample_fps);
  overlay(doc, "method", f.method);
  overlay(doc, "embeddings_path", f.embeddings_path);
  overlay(doc, "ratio", f.ratio);
  overlay(doc, "skim_seconds", f.skim_seconds);
  overlay(doc, "k_mode", f.k_mode);
  overlay(doc, "k", f.k);
  overlay(doc, "seed", f.seed);
  overlay(doc, "restarts", f.restarts);
  overlay(doc, "uniform_every", f.uniform_every);
  overlay(doc, "hist_threshold", f.hist_threshold);
  overlay(doc, "output_dir", f.output_dir);
  overlay(doc, "video_id", f.video_id);
  return vsum::config_from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised video summarization: keyframes, skims, and F-score evaluation"};
  app.require_subcommand(1);

  SummarizeFlags sf;
  auto* summarize = app.add_subcommand("summarize", "Summarize a PPM frame directory");
  summarize->add_option("-c,--config", sf.config_path, "JSON config file");
  summarize->add_option("--input-dir", sf.input_dir, "Directory of P6 frames");
  summarize->add_option("--src-fps", sf.src_fps, "Source frame rate");
  summarize->add_option("--sample-fps", sf.sample_fps, "Sampling rate (default 5)");
  summarize->add_option("--method", sf.method,
                        "uniform|histogram|hog|vsumm_kmeans|vsumm_gmm|cnn_kmeans|cnn_gmm");
  summarize->add_option("--embeddings", sf.embeddings_path, "EMB1 file for cnn_* methods");
  summarize->add_option("--ratio", sf.ratio, "Summary length ratio (default 0.15)");
  summarize->add_option("--skim-seconds", sf.skim_seconds, "Skim window (default 1.8)");
  summarize->add_option("--k-mode", sf.k_mode, "duration_budget|frame_fraction");
  summarize->add_option("--k", sf.k, "Fixed cluster count");
  summarize->add_option("--seed", sf.seed, "PRNG seed (default 0)");
  summarize->add_option("--restarts", sf.restarts, "k-means restarts (default 10)");
  summarize->add_option("--uniform-every", sf.uniform_every, "Uniform stride (default 7)");
  summarize->add_option("--hist-threshold", sf.hist_threshold, "Histogram cut threshold (default 0.5)");
  summarize->add_option("-o,--output-dir", sf.output_dir, "Output directory");
  summarize->add_option("--video-id", sf.video_id, "Video id (default: input dir name)");

  std::string mask_path, annotations_path, method, table_path, eval_video_id;
  std::optional<std::string> report_dir;
  auto* evaluate = app.add_subcommand("evaluate", "Score a mask against annotations");
  evaluate->add_option("--mask", mask_path, "Mask text file")->required();
  evaluate->add_option("--annotations", annotations_path, "Annotation CSV")->required();
  evaluate->add_option("--method", method, "Method label for the table")->required();
  evaluate->add_option("--table", table_path, "CSV table to append to")->required();
  evaluate->add_option("--report-dir", report_dir, "Directory for the JSON report");
  evaluate->add_option("--video-id", eval_video_id, "Video id (default: annotation file stem)");

  std::string base_annotations, base_table, base_video_id;
  auto* baseline = app.add_subcommand("baseline", "Leave-one-out human F-score");
  baseline->add_option("--annotations", base_annotations, "Annotation CSV")->required();
  baseline->add_option("--table", base_table, "CSV table to append to")->required();
  baseline->add_option("--video-id", base_video_id, "Video id (default: annotation file stem)");

  std::vector<std::string> report_tables;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Merge tables into a video x method matrix");
  report->add_option("tables", report_tables, "Table CSV files")->required();
  report->add_option("-o,--output", report_out, "Output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*summarize) {
      const auto result = vsum::run_summarize(resolve_config(sf));
      std::cout << result.selection.keyframes_original.size() << " keyframes, "
                << result.model["selected_frames"] << " of " << result.model["n_original"]
                << " frames selected\n";
      if (result.selection.budget_overflow)
        std::cerr << "warning: keyframes alone exceed the summary budget\n";
    } else if (*evaluate) {
      const auto r = vsum::run_evaluate(mask_path, annotations_path, method, table_path,
                                        report_dir, eval_video_id);
      std::cout << r.video_id << ',' << r.method << " f_mean=" << r.f_mean << " f_max=" << r.f_max
                << '\n';
    } else if (*baseline) {
      std::cout << vsum::run_baseline(base_annotations, base_table, base_video_id) << '\n';
    } else if (*report) {
      std::vector<std::filesystem::path> paths(report_tables.begin(), report_tables.end());
      const std::string text = vsum::build_report(paths);
      if (report_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(report_out, std::ios::binary);
        out << text;
        if (!out) {
          std::cerr << "error: cannot write " << report_out << '\n';
          return 2;
        }
      }
    }
  } catch (const vsum::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vsum::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
