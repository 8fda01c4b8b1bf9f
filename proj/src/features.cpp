#include "vsum/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "vsum/error.hpp"

namespace vsum {

namespace {

constexpr const char* kModule = "features";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

void append_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

}  // namespace

std::string_view to_string(Extractor e) {
  switch (e) {
    case Extractor::GrayHist: return "gray_hist";
    case Extractor::ColorHist48: return "color_hist48";
    case Extractor::Hog: return "hog";
    case Extractor::CnnEmbedding: return "cnn_embedding";
  }
  return "unknown";
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> values,
                             Extractor extractor)
    : rows_(rows), dim_(dim), values_(std::move(values)), extractor_(extractor) {
  if (values_.size() != rows_ * dim_)
    fail(ErrorKind::InvalidArgument, "matrix buffer length must equal rows*dim");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      fail(ErrorKind::NonFiniteValue, "row " + std::to_string(i / std::max<std::size_t>(dim_, 1)) +
                                          " holds a non-finite value");
  }
}

std::uint64_t GrayHistogram::total() const noexcept {
  std::uint64_t sum = 0;
  for (auto b : bins) sum += b;
  return sum;
}

GrayHistogram gray_histogram(const GrayImage& img) {
  GrayHistogram h;
  for (auto v : img.data()) ++h.bins[v];
  return h;
}

double hist_dissimilarity(const GrayHistogram& a, const GrayHistogram& b) {
  const double ta = static_cast<double>(a.total());
  const double tb = static_cast<double>(b.total());
  if (ta == 0.0 || tb == 0.0) fail(ErrorKind::InvalidArgument, "histogram of an empty image");
  double l1 = 0.0;
  for (std::size_t v = 0; v < a.bins.size(); ++v) {
    l1 += std::abs(static_cast<double>(a.bins[v]) / ta - static_cast<double>(b.bins[v]) / tb);
  }
  return std::clamp(0.5 * l1, 0.0, 1.0);
}

ColorHistogram48 color_histogram48(const PixelImage& img) {
  std::array<std::uint64_t, 48> counts{};
  const auto rgb = img.data();
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    for (std::size_t c = 0; c < 3; ++c) ++counts[c * 16 + rgb[i + c] / 16];
  }
  ColorHistogram48 h;
  const double n = static_cast<double>(img.pixel_count());
  for (std::size_t i = 0; i < counts.size(); ++i) h.bins[i] = static_cast<double>(counts[i]) / n;
  return h;
}

GrayImage resize_nearest(const GrayImage& img, std::uint32_t width, std::uint32_t height) {
  if (width == 0 || height == 0) fail(ErrorKind::InvalidArgument, "resize target must be positive");
  std::vector<std::uint8_t> out(std::size_t{width} * height);
  for (std::uint32_t y = 0; y < height; ++y) {
    const auto sy = static_cast<std::uint32_t>(std::uint64_t{y} * img.height() / height);
    for (std::uint32_t x = 0; x < width; ++x) {
      const auto sx = static_cast<std::uint32_t>(std::uint64_t{x} * img.width() / width);
      out[std::size_t{y} * width + x] = img.at(sx, sy);
    }
  }
  return GrayImage(width, height, std::move(out));
}

std::vector<double> hog_descriptor(const GrayImage& input) {
  using namespace hog;
  const GrayImage img = resize_nearest(input, kImageSize, kImageSize);

  // cell_hist[(cy * kCells + cx) * kBins + bin]
  std::vector<double> cell_hist(std::size_t{kCells} * kCells * kBins, 0.0);
  constexpr double kBinWidth = 180.0 / kBins;

  for (std::uint32_t y = 1; y + 1 < kImageSize; ++y) {
    for (std::uint32_t x = 1; x + 1 < kImageSize; ++x) {
      const double gx = static_cast<double>(img.at(x + 1, y)) - static_cast<double>(img.at(x - 1, y));
      const double gy = static_cast<double>(img.at(x, y + 1)) - static_cast<double>(img.at(x, y - 1));
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;

      const double pos = angle / kBinWidth;
      const double base = std::floor(pos);
      const double frac = pos - base;
      const auto lo = static_cast<std::uint32_t>(base) % kBins;
      const auto hi = (lo + 1) % kBins;

      double* cell = &cell_hist[(std::size_t{y / kCellSize} * kCells + x / kCellSize) * kBins];
      cell[lo] += mag * (1.0 - frac);
      cell[hi] += mag * frac;
    }
  }

  std::vector<double> descriptor;
  descriptor.reserve(kDim);
  std::array<double, kBlockCells * kBlockCells * kBins> block{};
  for (std::uint32_t by = 0; by < kBlocks; ++by) {
    for (std::uint32_t bx = 0; bx < kBlocks; ++bx) {
      std::size_t k = 0;
      for (std::uint32_t cy = 0; cy < kBlockCells; ++cy) {
        for (std::uint32_t cx = 0; cx < kBlockCells; ++cx) {
          const double* cell = &cell_hist[(std::size_t{by + cy} * kCells + (bx + cx)) * kBins];
          for (std::uint32_t b = 0; b < kBins; ++b) block[k++] = cell[b];
        }
      }
      double sq = 0.0;
      for (double v : block) sq += v * v;
      const double norm = std::sqrt(sq + kEpsilon * kEpsilon);
      for (double v : block) descriptor.push_back(v / norm);
    }
  }
  return descriptor;
}

FeatureMatrix load_embeddings(const std::filesystem::path& path, std::size_t expected_rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < 4 || bytes[0] != 'E' || bytes[1] != 'M' || bytes[2] != 'B' || bytes[3] != '1')
    fail(ErrorKind::BadMagic, path.filename().string() + ": magic is not EMB1");
  if (bytes.size() < 12) fail(ErrorKind::TruncatedPayload, "EMB1 header is shorter than 12 bytes");
  const std::uint32_t rows = read_u32_le(bytes.data() + 4);
  const std::uint32_t dim = read_u32_le(bytes.data() + 8);
  if (rows != expected_rows)
    fail(ErrorKind::RowCountMismatch, "file has " + std::to_string(rows) + " rows, expected " +
                                          std::to_string(expected_rows));

  const std::uint64_t need = std::uint64_t{rows} * dim * 4;
  const std::uint64_t have = bytes.size() - 12;
  if (have < need)
    fail(ErrorKind::TruncatedPayload,
         "payload has " + std::to_string(have) + " bytes, need " + std::to_string(need));
  if (have > need)
    fail(ErrorKind::TrailingData, std::to_string(have - need) + " bytes after the payload");

  std::vector<double> values(std::size_t{rows} * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = std::bit_cast<float>(read_u32_le(bytes.data() + 12 + 4 * i));
    if (!std::isfinite(f))
      fail(ErrorKind::NonFiniteValue, "row " + std::to_string(i / dim) + " column " +
                                          std::to_string(i % dim) + " is not finite");
    values[i] = f;
  }
  return FeatureMatrix(rows, dim, std::move(values), Extractor::CnnEmbedding);
}

void write_embeddings(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::vector<std::uint8_t> bytes{'E', 'M', 'B', '1'};
  append_u32_le(bytes, static_cast<std::uint32_t>(m.rows()));
  append_u32_le(bytes, static_cast<std::uint32_t>(m.dim()));
  for (double v : m.values()) append_u32_le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

FeatureMatrix extract(const SampledSequence& seq, Extractor method) {
  if (seq.size() == 0) fail(ErrorKind::EmptySequence, "no sampled frames");
  std::vector<double> values;
  std::size_t dim = 0;
  switch (method) {
    case Extractor::GrayHist: {
      dim = 256;
      values.reserve(seq.size() * dim);
      for (std::size_t j = 0; j < seq.size(); ++j) {
        const auto h = gray_histogram(to_grayscale(seq.frame(j)));
        const double n = static_cast<double>(h.total());
        for (auto b : h.bins) values.push_back(static_cast<double>(b) / n);
      }
      break;
    }
    case Extractor::ColorHist48: {
      dim = 48;
      values.reserve(seq.size() * dim);
      for (std::size_t j = 0; j < seq.size(); ++j) {
        const auto h = color_histogram48(seq.frame(j));
        values.insert(values.end(), h.bins.begin(), h.bins.end());
      }
      break;
    }
    case Extractor::Hog: {
      dim = hog::kDim;
      values.reserve(seq.size() * dim);
      for (std::size_t j = 0; j < seq.size(); ++j) {
        const auto d = hog_descriptor(to_grayscale(seq.frame(j)));
        values.insert(values.end(), d.begin(), d.end());
      }
      break;
    }
    case Extractor::CnnEmbedding:
      fail(ErrorKind::InvalidArgument, "cnn embeddings are loaded from EMB1 files, not extracted");
  }
  return FeatureMatrix(seq.size(), dim, std::move(values), method);
}

}  // namespace vsum
