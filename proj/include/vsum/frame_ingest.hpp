#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace vsum {

/// Interleaved 8-bit RGB, row-major.
class PixelImage {
 public:
  PixelImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data);
  /// Solid-color image.
  PixelImage(std::uint32_t width, std::uint32_t height, std::uint8_t r, std::uint8_t g,
             std::uint8_t b);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return std::size_t{width_} * height_; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }

  bool operator==(const PixelImage&) const = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<std::uint8_t> data_;
};

/// Single-channel 8-bit image, row-major.
class GrayImage {
 public:
  GrayImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return std::size_t{width_} * height_; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::uint8_t at(std::uint32_t x, std::uint32_t y) const noexcept {
    return data_[std::size_t{y} * width_ + x];
  }

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<std::uint8_t> data_;
};

struct FrameSequence {
  std::vector<PixelImage> frames;
  double src_fps = 0.0;
  std::string video_id;

  std::size_t size() const noexcept { return frames.size(); }
  double duration_sec() const noexcept { return static_cast<double>(frames.size()) / src_fps; }
};

/// A strided view onto a FrameSequence. The parent must outlive it.
class SampledSequence {
 public:
  SampledSequence(const FrameSequence& parent, std::size_t stride);

  const FrameSequence& parent() const noexcept { return *parent_; }
  std::size_t stride() const noexcept { return stride_; }
  const std::vector<std::size_t>& sampled_indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  std::size_t n_original() const noexcept { return parent_->size(); }
  double src_fps() const noexcept { return parent_->src_fps; }
  const PixelImage& frame(std::size_t j) const { return parent_->frames.at(indices_.at(j)); }

 private:
  const FrameSequence* parent_;
  std::size_t stride_;
  std::vector<std::size_t> indices_;
};

/// Reads one binary P6 file with maxval 255. Header comments ('#') are skipped.
PixelImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const PixelImage& img);

/// Loads every regular file in `dir`, ordered by byte-wise filename comparison.
FrameSequence load_ppm_dir(const std::filesystem::path& dir, double src_fps,
                           std::string video_id);

/// Stride round(src_fps / target_fps), at least 1.
std::size_t sampling_stride(double src_fps, double target_fps);
SampledSequence subsample(const FrameSequence& seq, double target_fps = 5.0);

/// BT.601 luma, rounded to nearest.
GrayImage to_grayscale(const PixelImage& img);

}  // namespace vsum
