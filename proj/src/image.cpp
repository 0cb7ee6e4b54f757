#include "skincure/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace skincure {
namespace {

bool has_supported_magic(std::span<const std::uint8_t> b) {
  const bool png = b.size() >= 8 && b[0] == 0x89 && b[1] == 'P' && b[2] == 'N' && b[3] == 'G';
  const bool jpeg = b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
  const bool bmp = b.size() >= 2 && b[0] == 'B' && b[1] == 'M';
  return png || jpeg || bmp;
}

}  // namespace

GrayImage to_luminance(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = luma(src[i]);
  return out;
}

std::size_t count_foreground(const BinaryMask& mask) noexcept {
  return static_cast<std::size_t>(std::count_if(mask.pixels().begin(), mask.pixels().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (!has_supported_magic(bytes)) {
    throw Error(ErrorCode::DecodeFailed, "payload is not a PNG, JPEG or BMP image");
  }
  const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  const cv::Mat bgr = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error(ErrorCode::DecodeFailed, "image data could not be decoded");
  RgbImage out(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) out(x, y) = Rgb{row[x][2], row[x][1], row[x][0]};
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

RgbImage read_image(const std::filesystem::path& path) { return decode_image(read_file_bytes(path)); }

ImageSize read_image_size(const std::filesystem::path& path) {
  const RgbImage img = read_image(path);
  return {img.width(), img.height()};
}

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      const Rgb p = img(x, y);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", bgr, out)) throw Error(ErrorCode::IoError, "PNG encoding failed");
  return out;
}

std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask) {
  cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask(x, y) ? 255 : 0;
  }
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", gray, out, {cv::IMWRITE_PNG_BILEVEL, 1})) {
    throw Error(ErrorCode::IoError, "PNG encoding failed");
  }
  return out;
}

BinaryMask read_mask(const std::filesystem::path& path) {
  const RgbImage img = read_image(path);
  BinaryMask mask(img.width(), img.height());
  auto src = img.pixels();
  auto dst = mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = (src[i].r | src[i].g | src[i].b) ? 1 : 0;
  }
  return mask;
}

}  // namespace skincure
