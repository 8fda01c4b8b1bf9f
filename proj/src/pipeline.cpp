#include "vsum/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "vsum/features.hpp"

namespace vsum {

namespace {

constexpr const char* kModule = "cli";

[[noreturn]] void config_error(const std::string& msg) {
  throw Error(ErrorKind::ConfigInvalid, kModule, msg);
}

[[noreturn]] void data_error(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

constexpr std::pair<Method, std::string_view> kMethods[] = {
    {Method::Uniform, "uniform"},         {Method::Histogram, "histogram"},
    {Method::Hog, "hog"},                 {Method::VsummKmeans, "vsumm_kmeans"},
    {Method::VsummGmm, "vsumm_gmm"},      {Method::CnnKmeans, "cnn_kmeans"},
    {Method::CnnGmm, "cnn_gmm"},
};

Method parse_method(const std::string& s) {
  for (const auto& [m, name] : kMethods)
    if (name == s) return m;
  config_error("unknown method '" + s + "'");
}

KMode parse_k_mode(const std::string& s) {
  if (s == "duration_budget") return KMode::DurationBudget;
  if (s == "frame_fraction") return KMode::FrameFraction;
  config_error("unknown k_mode '" + s + "'");
}

bool uses_embeddings(Method m) { return m == Method::CnnKmeans || m == Method::CnnGmm; }
bool uses_kmeans(Method m) { return m == Method::VsummKmeans || m == Method::CnnKmeans; }

template <typename T>
T get_as(const nlohmann::json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) data_error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) data_error(ErrorKind::Io, "short write to " + path.string());
}

void check_csv_token(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_of(",\n\r") != std::string::npos)
    config_error(std::string(what) + " must be non-empty and free of commas and newlines");
}

void append_table_row(const std::filesystem::path& table_csv, const std::string& row) {
  const bool fresh = !std::filesystem::exists(table_csv) || std::filesystem::file_size(table_csv) == 0;
  std::ofstream out(table_csv, std::ios::binary | std::ios::app);
  if (!out) data_error(ErrorKind::Io, "cannot append to " + table_csv.string());
  if (fresh) out << kTableHeader << '\n';
  out << row << '\n';
  if (!out) data_error(ErrorKind::Io, "short write to " + table_csv.string());
}

}  // namespace

std::string_view to_string(Method m) {
  for (const auto& [method, name] : kMethods)
    if (method == m) return name;
  return "unknown";
}

std::string_view to_string(KMode m) {
  return m == KMode::DurationBudget ? "duration_budget" : "frame_fraction";
}

PipelineConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) config_error("config must be a JSON object");
  static const char* const kKeys[] = {
      "input_dir", "src_fps", "sample_fps", "method", "embeddings_path", "ratio",
      "skim_seconds", "k_mode", "k", "seed", "restarts", "uniform_every", "hist_threshold",
      "output_dir", "video_id"};
  for (const auto& [key, _] : doc.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
      config_error("unknown config key '" + key + "'");
  }

  PipelineConfig c;
  auto has = [&](const char* key) { return doc.contains(key) && !doc.at(key).is_null(); };
  if (has("input_dir")) c.input_dir = get_as<std::string>(doc, "input_dir");
  if (has("src_fps")) c.src_fps = get_as<double>(doc, "src_fps");
  if (has("sample_fps")) c.sample_fps = get_as<double>(doc, "sample_fps");
  if (has("method")) c.method = parse_method(get_as<std::string>(doc, "method"));
  if (has("embeddings_path")) c.embeddings_path = get_as<std::string>(doc, "embeddings_path");
  if (has("ratio")) c.ratio = get_as<double>(doc, "ratio");
  if (has("skim_seconds")) c.skim_seconds = get_as<double>(doc, "skim_seconds");
  if (has("k_mode")) c.k_mode = parse_k_mode(get_as<std::string>(doc, "k_mode"));
  if (has("k")) c.k = get_as<std::size_t>(doc, "k");
  if (has("seed")) c.seed = get_as<std::uint64_t>(doc, "seed");
  if (has("restarts")) c.restarts = get_as<std::size_t>(doc, "restarts");
  if (has("uniform_every")) c.uniform_every = get_as<std::size_t>(doc, "uniform_every");
  if (has("hist_threshold")) c.hist_threshold = get_as<double>(doc, "hist_threshold");
  if (has("output_dir")) c.output_dir = get_as<std::string>(doc, "output_dir");
  if (has("video_id")) c.video_id = get_as<std::string>(doc, "video_id");
  return c;
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json doc = {
      {"input_dir", c.input_dir.string()},
      {"src_fps", c.src_fps},
      {"sample_fps", c.sample_fps},
      {"method", to_string(c.method)},
      {"embeddings_path", c.embeddings_path ? nlohmann::json(c.embeddings_path->string()) : nullptr},
      {"ratio", c.ratio},
      {"skim_seconds", c.skim_seconds},
      {"k_mode", to_string(c.k_mode)},
      {"k", c.k ? nlohmann::json(*c.k) : nullptr},
      {"seed", c.seed},
      {"restarts", c.restarts},
      {"uniform_every", c.uniform_every},
      {"hist_threshold", c.hist_threshold},
      {"output_dir", c.output_dir.string()},
      {"video_id", c.video_id},
  };
  return doc;
}

void validate(const PipelineConfig& c, bool require_output_dir) {
  if (c.input_dir.empty()) config_error("input_dir is required");
  if (!(c.src_fps > 0.0) || !std::isfinite(c.src_fps)) config_error("src_fps must be positive");
  if (!(c.sample_fps > 0.0)) config_error("sample_fps must be positive");
  if (c.sample_fps > c.src_fps) config_error("sample_fps must not exceed src_fps");
  if (!(c.ratio > 0.0 && c.ratio < 1.0)) config_error("ratio must lie in (0, 1)");
  if (!(c.skim_seconds > 0.0)) config_error("skim_seconds must be positive");
  if (c.restarts == 0) config_error("restarts must be >= 1");
  if (c.uniform_every == 0) config_error("uniform_every must be >= 1");
  if (!(c.hist_threshold >= 0.0 && c.hist_threshold <= 1.0))
    config_error("hist_threshold must lie in [0, 1]");
  if (c.k && *c.k == 0) config_error("k must be >= 1");
  if (uses_embeddings(c.method) && !c.embeddings_path)
    config_error(std::string(to_string(c.method)) + " requires embeddings_path");
  if (require_output_dir && c.output_dir.empty()) config_error("output_dir is required");
}

SummaryResult summarize(const PipelineConfig& config, const FrameSequence& frames) {
  validate(config, false);
  const SampledSequence sampled = subsample(frames, config.sample_fps);
  const std::size_t n = sampled.size();
  if (n == 0) data_error(ErrorKind::EmptySequence, "no frames to summarize");

  SummaryResult result;
  nlohmann::json& model = result.model;
  model = {
      {"video_id", frames.video_id},
      {"method", to_string(config.method)},
      {"n_original", frames.size()},
      {"src_fps", frames.src_fps},
      {"stride", sampled.stride()},
      {"n_sampled", n},
      {"seed", config.seed},
  };

  switch (config.method) {
    case Method::Uniform:
      result.keys = uniform_keyframes(n, config.uniform_every);
      model["every_k"] = config.uniform_every;
      break;
    case Method::Histogram: {
      std::vector<GrayHistogram> hists;
      hists.reserve(n);
      for (std::size_t j = 0; j < n; ++j) hists.push_back(gray_histogram(to_grayscale(sampled.frame(j))));
      result.keys = hist_threshold_keyframes(hists, config.hist_threshold);
      model["threshold"] = config.hist_threshold;
      break;
    }
    case Method::Hog: {
      if (n < 2) {
        result.keys = uniform_keyframes(n, 1);
        result.keys.source = KeyframeSource::HogThreshold;
      } else {
        result.keys = hog_threshold_keyframes(extract(sampled, Extractor::Hog), config.ratio);
      }
      model["budget_ratio"] = config.ratio;
      break;
    }
    case Method::VsummKmeans:
    case Method::VsummGmm:
    case Method::CnnKmeans:
    case Method::CnnGmm: {
      const FeatureMatrix x = uses_embeddings(config.method)
                                  ? load_embeddings(*config.embeddings_path, n)
                                  : extract(sampled, Extractor::ColorHist48);
      const std::size_t k =
          config.k ? std::min(*config.k, n)
                   : choose_k(n, frames.duration_sec(), config.k_mode, config.ratio, config.skim_seconds);
      model["extractor"] = to_string(x.extractor());
      model["dim"] = x.dim();
      model["k"] = k;
      model["k_mode"] = config.k ? "fixed" : to_string(config.k_mode);
      model["restarts"] = config.restarts;
      if (uses_kmeans(config.method)) {
        KMeansOptions options;
        options.restarts = config.restarts;
        const KMeansModel km = kmeans_fit(x, k, config.seed, options);
        result.keys = nearest_to_center(x, km);
        model["wcss"] = km.wcss;
        model["iterations_run"] = km.iterations_run;
        model["best_restart"] = km.best_restart;
      } else {
        GmmOptions options;
        options.kmeans_restarts = config.restarts;
        const GmmModel gmm = gmm_fit(x, k, config.seed, options);
        result.keys = nearest_to_center(x, gmm);
        model["final_loglik"] = gmm.loglik_trace.back();
        model["em_iterations"] = gmm.loglik_trace.size();
        model["weights"] = gmm.weights;
      }
      break;
    }
  }

  result.selection = summarize_selection(result.keys, sampled, config.skim_seconds, config.ratio);
  model["keyframes_sampled"] = result.keys.indices;
  model["keyframes_original"] = result.selection.keyframes_original;
  model["selected_frames"] = std::count(result.selection.mask.begin(), result.selection.mask.end(), true);
  model["budget_frames"] = budget_frames(frames.size(), config.ratio);
  model["budget_overflow"] = result.selection.budget_overflow;
  return result;
}

SummaryResult run_summarize(const PipelineConfig& config) {
  validate(config, true);
  const std::string video_id =
      config.video_id.empty() ? config.input_dir.filename().string() : config.video_id;
  const FrameSequence frames = load_ppm_dir(config.input_dir, config.src_fps, video_id);
  SummaryResult result = summarize(config, frames);

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) data_error(ErrorKind::Io, "cannot create " + config.output_dir.string());

  write_mask(config.output_dir / "mask.txt", result.selection.mask);

  std::string keyframes;
  for (std::size_t o : result.selection.keyframes_original) keyframes += std::to_string(o) + '\n';
  write_text(config.output_dir / "keyframes.txt", keyframes);

  nlohmann::json segments = nlohmann::json::array();
  for (const auto& s : result.selection.segments) segments.push_back({s.start, s.end});
  const nlohmann::json seg_doc = {
      {"video_id", video_id},
      {"n_original", frames.size()},
      {"segments", segments},
      {"keyframes_original", result.selection.keyframes_original},
      {"budget_overflow", result.selection.budget_overflow},
  };
  write_text(config.output_dir / "segments.json", seg_doc.dump(2) + '\n');

  nlohmann::json model_doc = result.model;
  model_doc["config"] = config_to_json(config);
  write_text(config.output_dir / "model.json", model_doc.dump(2) + '\n');
  return result;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : report.per_user) {
    users.push_back({{"user", u.user},
                     {"precision", u.score.precision},
                     {"recall", u.score.recall},
                     {"f1", u.score.f1}});
  }
  return {{"video_id", report.video_id}, {"method", report.method}, {"f_mean", report.f_mean},
          {"f_max", report.f_max},       {"per_user", users}};
}

EvalReport run_evaluate(const std::filesystem::path& mask_path,
                        const std::filesystem::path& annotations_path, const std::string& method,
                        const std::filesystem::path& table_csv,
                        const std::optional<std::filesystem::path>& report_dir,
                        const std::string& video_id) {
  check_csv_token(method, "method");
  const std::vector<bool> mask = read_mask(mask_path);
  const AnnotationSet ann = load_annotations(annotations_path, mask.size(), video_id);
  check_csv_token(ann.video_id, "video id");
  const EvalReport report = evaluate(mask, ann, method);

  if (report_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*report_dir, ec);
    if (ec) data_error(ErrorKind::Io, "cannot create " + report_dir->string());
    write_text(*report_dir / (report.video_id + "__" + method + ".json"), to_json(report).dump(2) + '\n');
  }
  append_table_row(table_csv, report.video_id + ',' + method + ',' + format_score(report.f_mean) +
                                  ',' + format_score(report.f_max));
  return report;
}

double run_baseline(const std::filesystem::path& annotations_path,
                    const std::filesystem::path& table_csv, const std::string& video_id) {
  const AnnotationSet ann = load_annotations(annotations_path, 0, video_id);
  check_csv_token(ann.video_id, "video id");
  const auto per_user = human_leave_one_out(ann);
  const double mean = human_baseline(ann);
  const double best = *std::max_element(per_user.begin(), per_user.end());
  append_table_row(table_csv, ann.video_id + ',' + std::string(kHumanMethod) + ',' +
                                  format_score(mean) + ',' + format_score(best));
  return mean;
}

std::string build_report(std::span<const std::filesystem::path> tables) {
  std::vector<std::string> videos;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, std::string>, double> cells;

  for (const auto& table : tables) {
    std::ifstream in(table);
    if (!in) data_error(ErrorKind::Io, "cannot open " + table.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line == kTableHeader) continue;
      std::vector<std::string> parts;
      std::stringstream ss(line);
      std::string part;
      while (std::getline(ss, part, ',')) parts.push_back(part);
      if (parts.size() != 4)
        data_error(ErrorKind::RaggedRow, table.filename().string() + ":" + std::to_string(line_no) +
                                             ": expected video,method,f_mean,f_max");
      double f_mean = 0.0;
      try {
        std::size_t used = 0;
        f_mean = std::stod(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
      } catch (const std::exception&) {
        data_error(ErrorKind::NonNumericCell,
                   table.filename().string() + ":" + std::to_string(line_no) + ": bad f_mean");
      }
      if (std::find(videos.begin(), videos.end(), parts[0]) == videos.end()) videos.push_back(parts[0]);
      if (std::find(methods.begin(), methods.end(), parts[1]) == methods.end()) methods.push_back(parts[1]);
      cells[{parts[0], parts[1]}] = f_mean;
    }
  }

  // The human baseline leads, as in the usual results table.
  std::stable_partition(methods.begin(), methods.end(),
                        [](const std::string& m) { return m == kHumanMethod; });

  std::string out = "video";
  for (const auto& m : methods) out += ',' + m;
  out += '\n';
  std::vector<double> sums(methods.size(), 0.0);
  std::vector<std::size_t> counts(methods.size(), 0);
  for (const auto& v : videos) {
    out += v;
    for (std::size_t j = 0; j < methods.size(); ++j) {
      out += ',';
      const auto it = cells.find({v, methods[j]});
      if (it == cells.end()) continue;
      out += format_score(it->second);
      sums[j] += it->second;
      ++counts[j];
    }
    out += '\n';
  }
  out += "mean";
  for (std::size_t j = 0; j < methods.size(); ++j) {
    out += ',';
    if (counts[j] > 0) out += format_score(sums[j] / static_cast<double>(counts[j]));
  }
  out += '\n';
  return out;
}

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::ConfigInvalid ? 1 : 2;
}

}  // namespace vsum
