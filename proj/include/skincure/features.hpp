#pragma once

// Lesion descriptors. The fixed 55-value layout (version 1) is
//
//   [0..7]   FFT radial-band energies      [29..44] colour
//   [8..23]  DCT zig-zag coefficients      [45..46] pigment network
//   [24..28] complexity                    [47..49] shape
//                                          [50] orientation  [51] margin
//                                          [52..54] intensity pattern
//
// Any change to the layout must bump kLayoutVersion.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "skincure/image.hpp"
#include "skincure/pipeline.hpp"

namespace skincure::features {

inline constexpr int kLayoutVersion = 1;
inline constexpr std::size_t kFeatureCount = 55;

inline constexpr std::size_t kFftOffset = 0;
inline constexpr std::size_t kDctOffset = 8;
inline constexpr std::size_t kComplexityOffset = 24;
inline constexpr std::size_t kColorOffset = 29;
inline constexpr std::size_t kPigmentOffset = 45;
inline constexpr std::size_t kShapeOffset = 47;
inline constexpr std::size_t kOrientationOffset = 50;
inline constexpr std::size_t kMarginOffset = 51;
inline constexpr std::size_t kIntensityOffset = 52;

struct FeatureConfig {
  int crop_size = 128;
  std::size_t min_area = 50;
  double color_presence_fraction = 0.05;
  double color_match_distance = 60.0;
  double ring_width = 10.0;
  double pigment_se_radius_sq = 2.0;  // 3 px wide disk
  double pigment_min_response = 1.0;
  double margin_half_band = 2.5;
  int intensity_bins = 64;
};

const FeatureConfig& default_feature_config();

struct ReferenceColor {
  std::string_view name;
  Rgb rgb;
};

/// white, red, light brown, dark brown, blue-gray, black.
const std::array<ReferenceColor, 6>& reference_palette();

struct FeatureVector {
  std::vector<double> values;
  int layout_version = kLayoutVersion;
};

/// Lesion bounding box resampled to crop_size^2: luminance and a {0,1} mask.
struct LesionCrop {
  GrayImage luminance;
  BinaryMask mask;
};

LesionCrop make_crop(const RgbImage& img, const SegmentationResult& seg,
                     const FeatureConfig& cfg = default_feature_config());

// Block computations on an already-prepared square crop. Exposed so they can
// be checked against brute-force transforms.

/// Log-magnitude spectrum energy in 8 equal-width radial bands over
/// (0, hypot(W/2, H/2)], each divided by the total non-DC energy; all zero for
/// a constant crop.
std::array<double, 8> radial_band_energies(const GrayImage& crop);
/// Radial band index of the DFT bin (u, v) for a W x H transform, -1 for DC.
int radial_band(int u, int v, int width, int height, int bands = 8);

/// First 16 zig-zag DCT coefficients after DC, each divided by (|DC| + 1).
std::array<double, 16> dct_zigzag_coefficients(const GrayImage& crop);

// Extractors. All throw Error(DegenerateLesion) when area_px < min_area.

std::array<double, 8> fft_features(const RgbImage& img, const SegmentationResult& seg,
                                   const FeatureConfig& cfg = default_feature_config());
std::array<double, 16> dct_features(const RgbImage& img, const SegmentationResult& seg,
                                    const FeatureConfig& cfg = default_feature_config());
/// compactness, asymmetry (major axis), asymmetry (minor axis),
/// border irregularity, convexity deficiency.
std::array<double, 5> complexity_features(const RgbImage& img, const SegmentationResult& seg,
                                          const FeatureConfig& cfg = default_feature_config());
/// mean/std of R,G,B (0-255) and H,S,V (0-1) inside the lesion, reference
/// colour count, lesion-minus-ring mean difference for R,G,B.
std::array<double, 16> color_features(const RgbImage& img, const SegmentationResult& seg,
                                      const FeatureConfig& cfg = default_feature_config());
/// network density, mean network strength / 255.
std::array<double, 2> pigment_network_features(const RgbImage& img, const SegmentationResult& seg,
                                               const FeatureConfig& cfg = default_feature_config());
/// extent, eccentricity, solidity, orientation, margin sharpness,
/// luminance variance, skewness, histogram entropy (bits).
std::array<double, 8> shape_orientation_margin_intensity(const RgbImage& img, const SegmentationResult& seg,
                                                         const FeatureConfig& cfg = default_feature_config());

/// All extractors on a hair-free image with its segmentation.
FeatureVector extract_features(const RgbImage& clean, const SegmentationResult& seg,
                               const FeatureConfig& cfg = default_feature_config());

struct LesionAnalysis {
  RgbImage clean;  // after resolution limit and hair removal
  BinaryMask hair;
  SegmentationResult segmentation;
  FeatureVector features;
};

/// limit_resolution -> detect_hair -> remove_hair -> segment_lesion -> extract_features.
LesionAnalysis analyze_lesion(const RgbImage& img, const PipelineConfig& pcfg = default_pipeline_config(),
                              const FeatureConfig& fcfg = default_feature_config());

FeatureVector extract_all(const RgbImage& img);

// ---- standardisation -------------------------------------------------------

inline constexpr double kMinStd = 1e-9;

struct StandardizationStats {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation
};

/// Throws Error(InsufficientData) for fewer than two vectors and
/// Error(LayoutMismatch) when lengths or layout versions disagree.
StandardizationStats fit_standardization(const std::vector<FeatureVector>& vectors);

/// z-score per dimension; dimensions with std < kMinStd map to 0.
FeatureVector apply_standardization(const StandardizationStats& stats, const FeatureVector& v);

// ---- CSV export ------------------------------------------------------------

struct NamedVector {
  std::string image_id;
  FeatureVector features;
};

/// Header: image_id,f0..f54,layout_version. Values use round-trip precision.
void write_feature_csv(const std::filesystem::path& path, const std::vector<NamedVector>& rows);
std::vector<NamedVector> read_feature_csv(const std::filesystem::path& path);

}  // namespace skincure::features
