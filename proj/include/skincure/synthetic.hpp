#pragma once

// Deterministic synthetic dermoscopy-like images with exact ground truth.
// They stand in for PH2 in CI, CLI demos and the service tests.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "skincure/classifier.hpp"
#include "skincure/dataset.hpp"
#include "skincure/image.hpp"

namespace skincure::synth {

struct Harmonic {
  int lobes = 0;
  double amplitude = 0.0;  // relative radius modulation
  double phase = 0.0;
};

enum class ColorScheme { Uniform, TwoTone, Variegated };

struct LesionSpec {
  int width = 320;
  int height = 240;
  double cx = 160.0;
  double cy = 120.0;
  double radius = 60.0;  // semi-major axis before border modulation
  double axis_ratio = 1.0;  // major / minor
  double angle = 0.0;  // radians
  std::vector<Harmonic> border;
  ColorScheme scheme = ColorScheme::Uniform;
  Rgb skin{226, 182, 160};
  Rgb lesion{181, 134, 84};
  double network_strength = 0.0;  // darkening of network lines, 0..1
  int network_period = 8;
  int hair_count = 0;
  double noise = 3.0;  // uniform per-pixel noise amplitude, levels
  std::uint64_t seed = 1;
};

struct SyntheticLesion {
  RgbImage image;
  BinaryMask lesion_mask;
  BinaryMask hair_mask;
};

SyntheticLesion render(const LesionSpec& spec);

/// Class-typical parameters: round uniform light-brown nevi for Normal,
/// elongated two-tone lesions with mild border notching for Atypical,
/// irregular variegated lesions with a strong network for Melanoma.
LesionSpec class_spec(classify::LesionClass label, std::uint64_t seed, int width = 320, int height = 240);

SyntheticLesion make_lesion(classify::LesionClass label, std::uint64_t seed, int hair_count = 0);

RgbImage uniform_image(int width, int height, Rgb color);
/// Solid disk on a flat background, no noise.
RgbImage disk_image(int width, int height, double cx, double cy, double radius, Rgb fg, Rgb bg);
/// Pixels whose centre lies strictly inside the circle.
BinaryMask disk_mask(int width, int height, double cx, double cy, double radius);

/// Writes images/<id>.png, masks/<id>_lesion.png and manifest.csv under
/// `dir`; every `hair_every`-th image (0 = none) carries three hairs.
std::vector<dataset::Ph2Record> write_dataset(const std::filesystem::path& dir, std::array<std::size_t, 3> counts,
                                              std::uint64_t seed, std::size_t hair_every = 0, int width = 320,
                                              int height = 240);

}  // namespace skincure::synth
