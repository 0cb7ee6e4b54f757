#pragma once

// Low-level raster operations shared by the hair, segmentation and feature
// stages. Everything here preserves image dimensions.

#include <optional>
#include <span>
#include <vector>

#include "skincure/image.hpp"

namespace skincure::morph {

struct Offset {
  int dx = 0;
  int dy = 0;
};

/// Centered line of `length` pixels at `angle_deg` (0 = horizontal).
std::vector<Offset> line_element(int length, double angle_deg);
/// All offsets with dx^2 + dy^2 <= radius_sq.
std::vector<Offset> disk_element(double radius_sq);

// Grayscale morphology with replicated borders.
GrayImage dilate(const GrayImage& src, std::span<const Offset> se);
GrayImage erode(const GrayImage& src, std::span<const Offset> se);
GrayImage close(const GrayImage& src, std::span<const Offset> se);
/// close(src) - src; large on dark structures narrower than the element.
GrayImage black_hat(const GrayImage& src, std::span<const Offset> se);

/// Exact squared Euclidean distance from every pixel to the nearest
/// foreground pixel of `target` (0 on foreground, +inf if there is none).
GrayImage squared_distance_to(const BinaryMask& target);

// Binary morphology with a Euclidean disk; out-of-frame pixels never erode.
BinaryMask dilate_disk(const BinaryMask& mask, double radius);
BinaryMask erode_disk(const BinaryMask& mask, double radius);
BinaryMask close_disk(const BinaryMask& mask, double radius);

/// Sets every background region not 4-connected to the frame border.
BinaryMask fill_holes(const BinaryMask& mask);

BinaryMask invert(const BinaryMask& mask);

struct ComponentStats {
  std::size_t area = 0;
  double cx = 0.0;
  double cy = 0.0;
  // central second moments divided by area
  double mu20 = 0.0;
  double mu02 = 0.0;
  double mu11 = 0.0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive bounding box

  /// sqrt(major / minor eigenvalue); +inf for a perfect line.
  double elongation() const noexcept;
};

struct Components {
  Image<int> labels;  // 0 = background, 1..n
  std::vector<ComponentStats> stats;  // stats[i] describes label i + 1
};

/// Connected components with 4 or 8 connectivity.
Components label_components(const BinaryMask& mask, int connectivity = 8);

BinaryMask select_component(const Components& comps, int label);

struct OtsuResult {
  double threshold = 0.0;   // class 0 is values <= threshold
  double mean_low = 0.0;
  double mean_high = 0.0;
};

/// Otsu's method over a 256-bin histogram spanning [min, max] of `values`.
/// Returns nullopt when the values are constant (or empty).
std::optional<OtsuResult> otsu(std::span<const double> values);

/// Per-channel median over a size x size window (size odd), replicated borders.
RgbImage median_filter(const RgbImage& img, int size);

/// Bilinear resample of the inclusive window [x0,x1]x[y0,y1] to out_w x out_h,
/// sampling at pixel centers.
GrayImage resample_bilinear(const GrayImage& src, int x0, int y0, int x1, int y1, int out_w, int out_h);

/// Downscale by an integer factor using box averaging.
RgbImage downscale(const RgbImage& img, int factor);

}  // namespace skincure::morph
