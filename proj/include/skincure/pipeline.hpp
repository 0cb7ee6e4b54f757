#pragma once

// Dermoscopy preprocessing: hair detection and removal, then lesion
// segmentation.

#include <array>

#include "skincure/image.hpp"

namespace skincure {

/// Tunable constants of the hair and segmentation stages.
struct PipelineConfig {
  int min_dimension = 64;
  int max_side = 1024;

  // hair detection
  int hair_line_length = 9;
  std::array<double, 4> hair_angles_deg = {0.0, 45.0, 90.0, 135.0};
  double hair_min_elongation = 3.0;
  std::size_t hair_min_area = 20;
  double hair_min_response = 10.0;  // luminance levels; floor under the Otsu threshold

  // segmentation
  int median_size = 5;
  double closing_radius = 5.0;
  double center_fraction = 0.8;
  double max_border_touch = 0.3;
  double min_contrast = 15.0;  // Otsu class-mean gap below which the frame counts as uniform
  // Otsu statistics come from the ellipse inscribed in the frame, which keeps
  // dark vignetted corners of dermatoscope captures out of the histogram.
  bool threshold_on_inscribed_ellipse = true;
};

const PipelineConfig& default_pipeline_config();

/// Thin, dark, elongated structures. Throws Error(ImageTooSmall).
BinaryMask detect_hair(const RgbImage& img, const PipelineConfig& cfg = default_pipeline_config());

/// Fills hair pixels by repeated averaging of already-known 8-neighbours.
/// Pixels outside the mask are untouched. Throws Error(DimensionMismatch).
RgbImage remove_hair(const RgbImage& img, const BinaryMask& hair);

struct BoundingBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
  int width() const noexcept { return x1 - x0 + 1; }
  int height() const noexcept { return y1 - y0 + 1; }
};

struct SegmentationResult {
  BinaryMask mask;
  std::size_t area_px = 0;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  BoundingBox bbox;
  double border_touch_fraction = 0.0;  // share of frame-edge pixels covered by the lesion
};

/// Builds the result record (area, centroid, bbox, border touch) for a mask.
SegmentationResult describe_mask(BinaryMask mask);

/// Throws Error(ImageTooSmall), Error(NoLesionFound) or Error(LesionTouchesBorder).
SegmentationResult segment_lesion(const RgbImage& img, const PipelineConfig& cfg = default_pipeline_config());

/// 2|A n B| / (|A| + |B|), 1 when both are empty. Throws Error(DimensionMismatch).
double mask_dice(const BinaryMask& a, const BinaryMask& b);

/// Box-downscales by the smallest integer factor that brings the longer side
/// to at most cfg.max_side.
RgbImage limit_resolution(const RgbImage& img, const PipelineConfig& cfg = default_pipeline_config());

}  // namespace skincure
