#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "vsum/frame_ingest.hpp"

namespace vsum {

enum class Extractor { GrayHist, ColorHist48, Hog, CnnEmbedding };

std::string_view to_string(Extractor e);

/// N x D row-major matrix of per-frame descriptors. Rows are always finite.
class FeatureMatrix {
 public:
  FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> values, Extractor extractor);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  Extractor extractor() const noexcept { return extractor_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return std::span<const double>(values_).subspan(i * dim_, dim_);
  }
  double at(std::size_t i, std::size_t d) const noexcept { return values_[i * dim_ + d]; }

 private:
  std::size_t rows_;
  std::size_t dim_;
  std::vector<double> values_;
  Extractor extractor_;
};

struct GrayHistogram {
  std::array<std::uint64_t, 256> bins{};

  std::uint64_t total() const noexcept;
};

/// Three 16-bin channel blocks (R, G, B), each L1-normalized.
struct ColorHistogram48 {
  std::array<double, 48> bins{};
};

GrayHistogram gray_histogram(const GrayImage& img);

/// Half the L1 distance between the normalized histograms; in [0, 1].
double hist_dissimilarity(const GrayHistogram& a, const GrayHistogram& b);

ColorHistogram48 color_histogram48(const PixelImage& img);

namespace hog {
inline constexpr std::uint32_t kImageSize = 128;
inline constexpr std::uint32_t kCellSize = 8;
inline constexpr std::uint32_t kCells = kImageSize / kCellSize;  // per side
inline constexpr std::uint32_t kBlockCells = 2;
inline constexpr std::uint32_t kBlocks = kCells - kBlockCells + 1;  // per side
inline constexpr std::uint32_t kBins = 9;
inline constexpr double kEpsilon = 1e-6;
inline constexpr std::size_t kDim = std::size_t{kBlocks} * kBlocks * kBlockCells * kBlockCells * kBins;
}  // namespace hog

/// Nearest-neighbor resize: target pixel x samples source floor(x * W / w).
GrayImage resize_nearest(const GrayImage& img, std::uint32_t width, std::uint32_t height);

/// Histogram-of-oriented-gradients descriptor of length hog::kDim.
///
/// The frame is resized to 128x128, gradients are central differences (zero
/// on the one-pixel border), and unsigned orientations in [0, 180) vote into
/// 9 bins centered at 0, 20, ..., 160 degrees with linear splitting between
/// the two nearest centers (wrapping at 180). Cells are 8x8 pixels. Blocks
/// of 2x2 cells with a one-cell stride are normalized by
/// v / sqrt(|v|^2 + eps^2) and concatenated block-row-major, then
/// cell-row-major inside the block, then by bin.
std::vector<double> hog_descriptor(const GrayImage& img);

/// Reads an EMB1 file: "EMB1", u32 rows, u32 dim (little-endian), rows*dim float32.
FeatureMatrix load_embeddings(const std::filesystem::path& path, std::size_t expected_rows);

/// Writes `m` as EMB1; values are narrowed to float32.
void write_embeddings(const std::filesystem::path& path, const FeatureMatrix& m);

/// Per-frame descriptors in sampled order. CnnEmbedding is rejected; use load_embeddings.
FeatureMatrix extract(const SampledSequence& seq, Extractor method);

}  // namespace vsum
