#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "test_support.hpp"
#include "vsum/error.hpp"
#include "vsum/features.hpp"

using namespace vsum;
using vsum::testing::TempDir;
using vsum::testing::write_bytes;

namespace {

GrayImage gray(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> px) {
  return GrayImage(w, h, std::move(px));
}

GrayImage random_gray(std::mt19937_64& rng, std::uint32_t w, std::uint32_t h) {
  std::vector<std::uint8_t> px(std::size_t{w} * h);
  for (auto& p : px) p = static_cast<std::uint8_t>(rng() & 0xFF);
  return gray(w, h, std::move(px));
}

GrayHistogram hist_from(std::initializer_list<std::pair<int, std::uint64_t>> entries) {
  GrayHistogram h;
  for (auto [bin, count] : entries) h.bins[bin] = count;
  return h;
}

// Reference HOG written block by block, straight from the layout definition:
// each orientation bin b (center 20b degrees) takes weight
// max(0, 1 - circular_distance(angle, 20b) / 20) of the gradient magnitude.
std::vector<double> reference_hog(const GrayImage& src) {
  constexpr int kN = 128;
  std::vector<double> img(kN * kN);
  for (int y = 0; y < kN; ++y)
    for (int x = 0; x < kN; ++x) {
      const int sx = static_cast<int>(std::floor(static_cast<double>(x) * src.width() / kN));
      const int sy = static_cast<int>(std::floor(static_cast<double>(y) * src.height() / kN));
      img[y * kN + x] = src.at(static_cast<std::uint32_t>(sx), static_cast<std::uint32_t>(sy));
    }
  auto pixel_votes = [&](int x, int y, std::array<double, 9>& cell) {
    if (x == 0 || y == 0 || x == kN - 1 || y == kN - 1) return;
    const double gx = img[y * kN + x + 1] - img[y * kN + x - 1];
    const double gy = img[(y + 1) * kN + x] - img[(y - 1) * kN + x];
    const double mag = std::hypot(gx, gy);
    if (mag == 0.0) return;
    const double deg = std::fmod(std::atan2(gy, gx) + std::numbers::pi, std::numbers::pi) * 180.0 /
                       std::numbers::pi;
    for (int b = 0; b < 9; ++b) {
      double dist = std::abs(deg - 20.0 * b);
      dist = std::min(dist, 180.0 - dist);
      cell[b] += mag * std::max(0.0, 1.0 - dist / 20.0);
    }
  };
  std::vector<double> out;
  for (int by = 0; by < 15; ++by)
    for (int bx = 0; bx < 15; ++bx) {
      std::vector<double> block;
      for (int cy = by; cy < by + 2; ++cy)
        for (int cx = bx; cx < bx + 2; ++cx) {
          std::array<double, 9> cell{};
          for (int y = cy * 8; y < cy * 8 + 8; ++y)
            for (int x = cx * 8; x < cx * 8 + 8; ++x) pixel_votes(x, y, cell);
          block.insert(block.end(), cell.begin(), cell.end());
        }
      double sq = 0.0;
      for (double v : block) sq += v * v;
      for (double v : block) out.push_back(v / std::sqrt(sq + 1e-12));
    }
  return out;
}

}  // namespace

TEST_CASE("gray_histogram counts brightness values") {
  const auto h = gray_histogram(gray(2, 2, {7, 7, 7, 7}));
  CHECK(h.bins[7] == 4);
  CHECK(h.total() == 4);

  const auto h2 = gray_histogram(gray(1, 2, {0, 255}));
  CHECK(h2.bins[0] == 1);
  CHECK(h2.bins[255] == 1);
  CHECK(h2.total() == 2);
}

TEST_CASE("gray_histogram conserves pixel count") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto w = static_cast<std::uint32_t>(1 + rng() % 40);
    const auto h = static_cast<std::uint32_t>(1 + rng() % 40);
    CHECK(gray_histogram(random_gray(rng, w, h)).total() == std::uint64_t{w} * h);
  }
}

TEST_CASE("hist_dissimilarity examples") {
  const auto a = hist_from({{0, 10}});
  CHECK(hist_dissimilarity(a, a) == 0.0);
  CHECK(hist_dissimilarity(a, hist_from({{200, 3}})) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hist_dissimilarity(a, hist_from({{0, 1}, {1, 1}})) == 0.5);
  // Scale does not matter, only the normalized shape.
  CHECK(hist_dissimilarity(hist_from({{4, 2}, {9, 2}}), hist_from({{4, 50}, {9, 50}})) == 0.0);
}

TEST_CASE("hist_dissimilarity is a bounded symmetric pseudometric") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const auto a = gray_histogram(random_gray(rng, 1 + rng() % 8, 1 + rng() % 8));
    const auto b = gray_histogram(random_gray(rng, 1 + rng() % 8, 1 + rng() % 8));
    const double d = hist_dissimilarity(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d == hist_dissimilarity(b, a));
    CHECK(hist_dissimilarity(a, a) == 0.0);
  }
}

TEST_CASE("color_histogram48 examples") {
  const auto red = color_histogram48(PixelImage(1, 1, 255, 0, 0));
  CHECK(red.bins[15] == 1.0);
  CHECK(red.bins[16] == 1.0);
  CHECK(red.bins[32] == 1.0);

  const auto two = color_histogram48(PixelImage(2, 1, std::vector<std::uint8_t>{0, 0, 0, 16, 16, 16}));
  for (int c = 0; c < 3; ++c) {
    CHECK(two.bins[c * 16] == 0.5);
    CHECK(two.bins[c * 16 + 1] == 0.5);
  }
}

TEST_CASE("color_histogram48 normalizes each channel and ignores pixel order") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const auto w = static_cast<std::uint32_t>(1 + rng() % 12);
    const auto h = static_cast<std::uint32_t>(1 + rng() % 12);
    const auto img = vsum::testing::random_image(rng, w, h);
    const auto hist = color_histogram48(img);
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int b = 0; b < 16; ++b) s += hist.bins[c * 16 + b];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }

    // Shuffle whole pixels.
    std::vector<std::array<std::uint8_t, 3>> px(img.pixel_count());
    for (std::size_t i = 0; i < px.size(); ++i)
      px[i] = {img.data()[3 * i], img.data()[3 * i + 1], img.data()[3 * i + 2]};
    std::shuffle(px.begin(), px.end(), rng);
    std::vector<std::uint8_t> flat;
    for (const auto& p : px) flat.insert(flat.end(), p.begin(), p.end());
    CHECK(color_histogram48(PixelImage(w, h, std::move(flat))).bins == hist.bins);
  }
}

TEST_CASE("hog descriptor has fixed dimension and is zero on constant frames") {
  CHECK(hog::kDim == 8100);
  std::mt19937_64 rng(29);
  for (auto [w, h] : {std::pair{1u, 1u}, {7u, 300u}, {128u, 128u}, {320u, 240u}}) {
    CHECK(hog_descriptor(random_gray(rng, w, h)).size() == 8100);
  }
  for (std::uint8_t v : {0, 77, 255}) {
    const auto d = hog_descriptor(gray(33, 21, std::vector<std::uint8_t>(33 * 21, v)));
    for (double x : d) REQUIRE(x == 0.0);
  }
}

TEST_CASE("hog descriptor matches a block-by-block reference") {
  std::mt19937_64 rng(31);
  std::vector<GrayImage> inputs;
  inputs.push_back(random_gray(rng, 128, 128));
  inputs.push_back(random_gray(rng, 97, 61));
  std::vector<std::uint8_t> ramp(64 * 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) ramp[y * 64 + x] = static_cast<std::uint8_t>((3 * x + 2 * y) % 256);
  inputs.push_back(gray(64, 64, ramp));

  for (const auto& img : inputs) {
    const auto fast = hog_descriptor(img);
    const auto ref = reference_hog(img);
    REQUIRE(fast.size() == ref.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - ref[i]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("vertical step edge votes into the 0-degree bin") {
  std::vector<std::uint8_t> px(128 * 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 64; x < 128; ++x) px[y * 128 + x] = 255;
  const auto img = gray(128, 128, px);
  const auto d = hog_descriptor(img);
  const auto ref = reference_hog(img);

  std::array<double, 9> per_bin{}, ref_bin{};
  for (std::size_t i = 0; i < d.size(); ++i) {
    per_bin[i % 9] += d[i];
    ref_bin[i % 9] += ref[i];
  }
  CHECK(per_bin[0] > 0.0);
  for (int b = 1; b < 9; ++b) {
    CHECK(per_bin[b] == 0.0);
    CHECK(ref_bin[b] == 0.0);
  }
  CHECK(per_bin[0] == doctest::Approx(ref_bin[0]).epsilon(1e-12));
}

TEST_CASE("EMB1 loading") {
  TempDir dir("emb");
  auto header = [](std::uint32_t n, std::uint32_t d) {
    std::string s = "EMB1";
    for (auto v : {n, d})
      for (int k = 0; k < 4; ++k) s.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
    return s;
  };
  auto floats = [](std::initializer_list<float> vs) {
    std::string s;
    for (float f : vs) {
      const auto bits = std::bit_cast<std::uint32_t>(f);
      for (int k = 0; k < 4; ++k) s.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
    }
    return s;
  };
  auto kind_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };

  write_bytes(dir / "ok.emb", header(2, 3) + floats({1, 2, 3, 4, 5, 6.5f}));
  const auto m = load_embeddings(dir / "ok.emb", 2);
  CHECK(m.rows() == 2);
  CHECK(m.dim() == 3);
  CHECK(m.extractor() == Extractor::CnnEmbedding);
  CHECK(m.at(1, 2) == 6.5);

  write_bytes(dir / "five.emb", header(5, 1) + floats({1, 2, 3, 4, 5}));
  CHECK(kind_of([&] { load_embeddings(dir / "five.emb", 4); }) == ErrorKind::RowCountMismatch);

  write_bytes(dir / "nan.emb", header(1, 2) + floats({1, std::nanf("")}));
  CHECK(kind_of([&] { load_embeddings(dir / "nan.emb", 1); }) == ErrorKind::NonFiniteValue);

  write_bytes(dir / "magic.emb", "EMB2" + header(1, 1).substr(4) + floats({1}));
  CHECK(kind_of([&] { load_embeddings(dir / "magic.emb", 1); }) == ErrorKind::BadMagic);

  write_bytes(dir / "short.emb", header(2, 2) + floats({1, 2, 3}));
  CHECK(kind_of([&] { load_embeddings(dir / "short.emb", 2); }) == ErrorKind::TruncatedPayload);

  write_bytes(dir / "long.emb", header(1, 1) + floats({1, 2}));
  CHECK(kind_of([&] { load_embeddings(dir / "long.emb", 1); }) == ErrorKind::TrailingData);
}

TEST_CASE("EMB1 write then load is bit-exact for float32 values") {
  TempDir dir("emb_rt");
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<float> dist(-1e6f, 1e6f);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 1 + rng() % 6, d = 1 + rng() % 9;
    std::vector<double> v(n * d);
    for (auto& x : v) x = dist(rng);
    const FeatureMatrix m(n, d, v, Extractor::CnnEmbedding);
    write_embeddings(dir / "m.emb", m);
    CHECK(std::filesystem::file_size(dir / "m.emb") == 12 + n * d * 4);
    const auto back = load_embeddings(dir / "m.emb", n);
    CHECK(back.dim() == d);
    CHECK(std::equal(back.values().begin(), back.values().end(), v.begin()));
  }
}

TEST_CASE("extract produces one row per sampled frame") {
  std::mt19937_64 rng(43);
  FrameSequence seq;
  seq.src_fps = 15.0;
  for (int i = 0; i < 15; ++i) seq.frames.push_back(vsum::testing::random_image(rng, 20, 12));
  const auto s = subsample(seq, 5.0);  // stride 3 -> 5 frames
  REQUIRE(s.size() == 5);

  const auto c = extract(s, Extractor::ColorHist48);
  CHECK(c.rows() == 5);
  CHECK(c.dim() == 48);
  CHECK(c.at(2, 7) == color_histogram48(s.frame(2)).bins[7]);

  const auto h = extract(s, Extractor::Hog);
  CHECK(h.rows() == 5);
  CHECK(h.dim() == 8100);

  const auto g = extract(s, Extractor::GrayHist);
  CHECK(g.dim() == 256);

  CHECK_THROWS_AS(extract(s, Extractor::CnnEmbedding), Error);

  FrameSequence empty;
  empty.src_fps = 30.0;
  try {
    extract(SampledSequence(empty, 1), Extractor::Hog);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptySequence);
  }
}

TEST_CASE("FeatureMatrix rejects non-finite values") {
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1.0, INFINITY}, Extractor::Hog), Error);
}
