#include "vsum/frame_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "vsum/error.hpp"

namespace vsum {

namespace {

constexpr const char* kModule = "frame_ingest";

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, kModule, msg);
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Cursor over a PPM header: skips whitespace and '#' comments between tokens.
class HeaderReader {
 public:
  HeaderReader(const std::vector<std::uint8_t>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  std::uint32_t next_uint() {
    skip_separators();
    if (pos_ >= bytes_.size()) fail(ErrorKind::TruncatedPayload, name_ + ": header ends early");
    if (bytes_[pos_] < '0' || bytes_[pos_] > '9')
      fail(ErrorKind::UnsupportedFormat, name_ + ": expected a decimal header field");
    std::uint64_t value = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFull) fail(ErrorKind::UnsupportedFormat, name_ + ": header field overflow");
      ++pos_;
    }
    return static_cast<std::uint32_t>(value);
  }

  /// Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size()) fail(ErrorKind::TruncatedPayload, name_ + ": header ends early");
    if (!is_space(bytes_[pos_]))
      fail(ErrorKind::UnsupportedFormat, name_ + ": missing whitespace after maxval");
    return pos_ + 1;
  }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  const std::string& name_;
  std::size_t pos_ = 2;  // past the magic
};

}  // namespace

PixelImage::PixelImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width_ == 0 || height_ == 0)
    fail(ErrorKind::InvalidArgument, "image dimensions must be positive");
  if (data_.size() != pixel_count() * 3)
    fail(ErrorKind::InvalidArgument, "RGB buffer length must equal width*height*3");
}

PixelImage::PixelImage(std::uint32_t width, std::uint32_t height, std::uint8_t r,
                       std::uint8_t g, std::uint8_t b)
    : width_(width), height_(height) {
  if (width_ == 0 || height_ == 0)
    fail(ErrorKind::InvalidArgument, "image dimensions must be positive");
  data_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    data_[3 * i] = r;
    data_[3 * i + 1] = g;
    data_[3 * i + 2] = b;
  }
}

GrayImage::GrayImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width_ == 0 || height_ == 0)
    fail(ErrorKind::InvalidArgument, "image dimensions must be positive");
  if (data_.size() != pixel_count())
    fail(ErrorKind::InvalidArgument, "gray buffer length must equal width*height");
}

SampledSequence::SampledSequence(const FrameSequence& parent, std::size_t stride)
    : parent_(&parent), stride_(stride) {
  if (stride_ == 0) fail(ErrorKind::InvalidArgument, "stride must be >= 1");
  for (std::size_t i = 0; i < parent.size(); i += stride_) indices_.push_back(i);
}

PixelImage read_ppm(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    fail(ErrorKind::UnsupportedFormat, name + ": magic is not P6");

  HeaderReader header(bytes, name);
  const std::uint32_t width = header.next_uint();
  const std::uint32_t height = header.next_uint();
  const std::uint32_t maxval = header.next_uint();
  if (width == 0 || height == 0) fail(ErrorKind::UnsupportedFormat, name + ": zero dimension");
  if (maxval != 255)
    fail(ErrorKind::UnsupportedMaxval, name + ": maxval " + std::to_string(maxval) + " != 255");

  const std::size_t offset = header.raster_offset();
  const std::size_t need = std::size_t{width} * height * 3;
  if (bytes.size() - offset < need)
    fail(ErrorKind::TruncatedPayload, name + ": raster has " + std::to_string(bytes.size() - offset) +
                                          " bytes, need " + std::to_string(need));
  std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(offset + need));
  return PixelImage(width, height, std::move(data));
}

void write_ppm(const std::filesystem::path& path, const PixelImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  const auto data = img.data();
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

FrameSequence load_ppm_dir(const std::filesystem::path& dir, double src_fps,
                           std::string video_id) {
  if (!(src_fps > 0.0) || !std::isfinite(src_fps))
    fail(ErrorKind::InvalidArgument, "src_fps must be positive");
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    fail(ErrorKind::Io, "not a directory: " + dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  if (files.empty()) fail(ErrorKind::EmptyDirectory, "no frame files in " + dir.string());
  // Byte-wise order of the filename, independent of locale.
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });

  FrameSequence seq;
  seq.src_fps = src_fps;
  seq.video_id = std::move(video_id);
  seq.frames.reserve(files.size());
  for (const auto& file : files) {
    PixelImage img = read_ppm(file);
    if (!seq.frames.empty() && (img.width() != seq.frames.front().width() ||
                                img.height() != seq.frames.front().height())) {
      fail(ErrorKind::DimensionMismatch,
           file.filename().string() + " is " + std::to_string(img.width()) + "x" +
               std::to_string(img.height()) + ", expected " +
               std::to_string(seq.frames.front().width()) + "x" +
               std::to_string(seq.frames.front().height()));
    }
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

std::size_t sampling_stride(double src_fps, double target_fps) {
  if (!(target_fps > 0.0)) fail(ErrorKind::InvalidArgument, "target_fps must be positive");
  if (!(src_fps > 0.0)) fail(ErrorKind::InvalidArgument, "src_fps must be positive");
  const double stride = std::round(src_fps / target_fps);
  return stride < 1.0 ? 1 : static_cast<std::size_t>(stride);
}

SampledSequence subsample(const FrameSequence& seq, double target_fps) {
  return SampledSequence(seq, sampling_stride(seq.src_fps, target_fps));
}

GrayImage to_grayscale(const PixelImage& img) {
  const auto rgb = img.data();
  std::vector<std::uint8_t> gray(img.pixel_count());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    // Integer form of round(0.299 R + 0.587 G + 0.114 B); exact, ties round up.
    const std::uint32_t luma = 299u * rgb[3 * i] + 587u * rgb[3 * i + 1] + 114u * rgb[3 * i + 2];
    gray[i] = static_cast<std::uint8_t>(std::min<std::uint32_t>(255u, (luma + 500u) / 1000u));
  }
  return GrayImage(img.width(), img.height(), std::move(gray));
}

}  // namespace vsum
