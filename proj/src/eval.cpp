#include "vsum/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vsum/error.hpp"

namespace vsum {

namespace {

constexpr const char* kModule = "eval";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_score(const std::string& raw, std::size_t line_no) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value) ||
      value < 0.0) {
    fail(ErrorKind::NonNumericCell,
         "line " + std::to_string(line_no) + ": '" + cell + "' is not a non-negative number");
  }
  return value;
}

}  // namespace

AnnotationSet load_annotations(const std::filesystem::path& path, std::size_t n_frames_expected,
                               std::string video_id) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::RaggedRow, "missing header line");
  const auto header = split_csv_line(trim(line));
  if (header.size() < 2 || trim(header[0]) != "frame")
    fail(ErrorKind::RaggedRow, "header must be frame,user_1,...");

  AnnotationSet ann;
  ann.users = header.size() - 1;
  ann.masks.assign(ann.users, {});
  ann.video_id = video_id.empty() ? path.stem().string() : std::move(video_id);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(trim(line));
    if (cells.size() != header.size())
      fail(ErrorKind::RaggedRow, "line " + std::to_string(line_no) + " has " +
                                     std::to_string(cells.size()) + " cells, header has " +
                                     std::to_string(header.size()));
    parse_score(cells[0], line_no);
    for (std::size_t u = 0; u < ann.users; ++u)
      ann.masks[u].push_back(parse_score(cells[u + 1], line_no) > 0.0);
    ++ann.n_frames;
  }
  if (n_frames_expected != 0 && ann.n_frames != n_frames_expected)
    fail(ErrorKind::RowCountMismatch, "annotation has " + std::to_string(ann.n_frames) +
                                          " frames, expected " + std::to_string(n_frames_expected));
  return ann;
}

Prf prf(const std::vector<bool>& pred, const std::vector<bool>& truth) {
  if (pred.size() != truth.size())
    fail(ErrorKind::LengthMismatch, "prediction has " + std::to_string(pred.size()) +
                                        " frames, ground truth " + std::to_string(truth.size()));
  std::size_t tp = 0, n_pred = 0, n_truth = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    tp += pred[i] && truth[i];
    n_pred += pred[i];
    n_truth += truth[i];
  }
  Prf out;
  out.precision = n_pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_pred);
  out.recall = n_truth == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_truth);
  const double sum = out.precision + out.recall;
  out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

EvalReport evaluate(const std::vector<bool>& pred, const AnnotationSet& ann, std::string method) {
  if (ann.users == 0) fail(ErrorKind::InvalidArgument, "annotation set has no users");
  if (pred.size() != ann.n_frames)
    fail(ErrorKind::LengthMismatch, "mask has " + std::to_string(pred.size()) +
                                        " frames, annotation " + std::to_string(ann.n_frames));
  EvalReport report;
  report.method = std::move(method);
  report.video_id = ann.video_id;
  double sum = 0.0;
  for (std::size_t u = 0; u < ann.users; ++u) {
    const Prf s = prf(pred, ann.masks[u]);
    report.per_user.push_back({u + 1, s});
    sum += s.f1;
    report.f_max = std::max(report.f_max, s.f1);
  }
  report.f_mean = sum / static_cast<double>(ann.users);
  return report;
}

std::vector<double> human_leave_one_out(const AnnotationSet& ann) {
  if (ann.users < 2) fail(ErrorKind::InvalidArgument, "human baseline needs at least two users");
  std::vector<double> out;
  out.reserve(ann.users);
  for (std::size_t u = 0; u < ann.users; ++u) {
    double sum = 0.0;
    for (std::size_t v = 0; v < ann.users; ++v) {
      if (v != u) sum += prf(ann.masks[u], ann.masks[v]).f1;
    }
    out.push_back(sum / static_cast<double>(ann.users - 1));
  }
  return out;
}

double human_baseline(const AnnotationSet& ann) {
  const auto per_user = human_leave_one_out(ann);
  double sum = 0.0;
  for (double v : per_user) sum += v;
  return sum / static_cast<double>(per_user.size());
}

}  // namespace vsum
