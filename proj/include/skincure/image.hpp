#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "skincure/error.hpp"

namespace skincure {

/// Dense row-major raster.
template <class T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::InvalidArgument, "image dimensions must be positive");
    }
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  T& operator()(int x, int y) noexcept { return pixels_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return pixels_[index(x, y)]; }

  /// Coordinates clamped to the frame (replicate border).
  const T& clamped(int x, int y) const noexcept {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return pixels_[index(x, y)];
  }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> pixels() noexcept { return pixels_; }
  std::span<const T> pixels() const noexcept { return pixels_; }

  template <class U>
  bool same_shape(const Image<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> pixels_;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Image<Rgb>;
using GrayImage = Image<double>;
/// 0 = background, 1 = foreground.
using BinaryMask = Image<std::uint8_t>;

template <class A, class B>
void require_same_shape(const Image<A>& a, const Image<B>& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::DimensionMismatch, "image dimensions differ");
}

inline double luma(const Rgb& p) noexcept { return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b; }

GrayImage to_luminance(const RgbImage& img);

std::size_t count_foreground(const BinaryMask& mask) noexcept;

// ---- codecs ----------------------------------------------------------------

/// Decodes PNG, JPEG or BMP bytes. Anything else throws Error(DecodeFailed).
RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage read_image(const std::filesystem::path& path);

struct ImageSize {
  int width = 0;
  int height = 0;
};
ImageSize read_image_size(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const RgbImage& img);
/// 1-bit grayscale PNG.
std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask);
/// Any non-zero pixel of a decoded image counts as foreground.
BinaryMask read_mask(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace skincure
