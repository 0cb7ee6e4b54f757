#include "skincure/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "skincure/error.hpp"
#include "skincure/random.hpp"

namespace skincure::synth {
namespace {

using classify::LesionClass;
constexpr double kPi = std::numbers::pi;

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

struct Wave {
  double kx, ky, phase;
};

Rgb mix(Rgb a, Rgb b, double t) {
  return {clamp8(a.r + (b.r - a.r) * t), clamp8(a.g + (b.g - a.g) * t), clamp8(a.b + (b.b - a.b) * t)};
}

// Border radius in direction theta (lesion frame) for the modulated ellipse.
double border_radius(const LesionSpec& s, double theta) {
  const double a = s.radius;
  const double b = s.radius / s.axis_ratio;
  const double c = std::cos(theta);
  const double d = std::sin(theta);
  double r = a * b / std::sqrt(b * b * c * c + a * a * d * d);
  double mod = 1.0;
  for (const auto& h : s.border) mod += h.amplitude * std::cos(h.lobes * theta + h.phase);
  return r * mod;
}

void stamp(RgbImage& img, BinaryMask& mask, double x, double y, double radius, Rgb color) {
  const int x0 = static_cast<int>(std::floor(x - radius));
  const int x1 = static_cast<int>(std::ceil(x + radius));
  const int y0 = static_cast<int>(std::floor(y - radius));
  const int y1 = static_cast<int>(std::ceil(y + radius));
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      if (!img.contains(px, py)) continue;
      const double dx = px - x;
      const double dy = py - y;
      if (dx * dx + dy * dy <= radius * radius) {
        img(px, py) = color;
        mask(px, py) = 1;
      }
    }
  }
}

// A gently curved hair crossing the frame between two random edge points.
void draw_hair(RgbImage& img, BinaryMask& mask, std::mt19937_64& rng) {
  const double w = img.width();
  const double h = img.height();
  auto edge_point = [&](int side) -> std::pair<double, double> {
    const double t = uniform_range(rng, 0.1, 0.9);
    switch (side) {
      case 0: return {t * w, 0.0};
      case 1: return {w - 1.0, t * h};
      case 2: return {t * w, h - 1.0};
      default: return {0.0, t * h};
    }
  };
  const int side = static_cast<int>(uniform_below(rng, 4));
  const auto [ax, ay] = edge_point(side);
  const auto [bx, by] = edge_point((side + 2) % 4);
  const double mx = (ax + bx) / 2 + uniform_range(rng, -0.15, 0.15) * w;
  const double my = (ay + by) / 2 + uniform_range(rng, -0.15, 0.15) * h;
  const Rgb color{static_cast<std::uint8_t>(30 + uniform_below(rng, 20)), 24, 20};
  const int steps = static_cast<int>(4 * (w + h));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const double x = (1 - t) * (1 - t) * ax + 2 * (1 - t) * t * mx + t * t * bx;
    const double y = (1 - t) * (1 - t) * ay + 2 * (1 - t) * t * my + t * t * by;
    stamp(img, mask, x, y, 1.0, color);
  }
}

}  // namespace

SyntheticLesion render(const LesionSpec& s) {
  if (s.radius <= 0.0 || s.axis_ratio < 1.0) throw Error(ErrorCode::InvalidArgument, "bad lesion geometry");
  std::mt19937_64 rng(s.seed);
  SyntheticLesion out{RgbImage(s.width, s.height), BinaryMask(s.width, s.height), BinaryMask(s.width, s.height)};

  std::array<Wave, 4> waves{};
  for (auto& wv : waves) {
    const double freq = uniform_range(rng, 0.02, 0.06);
    const double dir = uniform_range(rng, 0.0, kPi);
    wv = {freq * std::cos(dir), freq * std::sin(dir), uniform_range(rng, 0.0, 2 * kPi)};
  }
  const Rgb dark_brown{102, 51, 0};
  const Rgb black{30, 24, 24};
  const Rgb blue_gray{90, 110, 140};

  const double ca = std::cos(s.angle);
  const double sa = std::sin(s.angle);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const double dx = x - s.cx;
      const double dy = y - s.cy;
      const double u = dx * ca + dy * sa;
      const double v = -dx * sa + dy * ca;
      const double rho = std::hypot(u, v);
      const double rb = border_radius(s, std::atan2(v, u));
      const double noise = uniform_range(rng, -s.noise, s.noise);

      Rgb c = s.skin;
      // Mild illumination falloff towards the frame corners.
      const double fall = 1.0 - 0.06 * (dx * dx + dy * dy) / (s.cx * s.cx + s.cy * s.cy);
      c = mix(Rgb{0, 0, 0}, c, fall);

      if (rho < rb) {
        out.lesion_mask(x, y) = 1;
        const double rel = rho / rb;
        switch (s.scheme) {
          case ColorScheme::Uniform:
            c = s.lesion;
            break;
          case ColorScheme::TwoTone:
            c = mix(dark_brown, s.lesion, std::clamp((rel - 0.35) / 0.3, 0.0, 1.0));
            break;
          case ColorScheme::Variegated: {
            double f = 0.0;
            for (const auto& wv : waves) f += std::cos(wv.kx * x + wv.ky * y + wv.phase);
            f /= waves.size();
            if (f < -0.25) {
              c = black;
            } else if (f < 0.15) {
              c = dark_brown;
            } else if (f < 0.4) {
              c = s.lesion;
            } else {
              c = blue_gray;
            }
            break;
          }
        }
        if (s.network_strength > 0.0) {
          const int p = std::max(3, s.network_period);
          if (x % p < 2 || y % p < 2) c = mix(c, Rgb{0, 0, 0}, s.network_strength);
        }
      }
      out.image(x, y) = {clamp8(c.r + noise), clamp8(c.g + noise), clamp8(c.b + noise)};
    }
  }
  for (int i = 0; i < s.hair_count; ++i) draw_hair(out.image, out.hair_mask, rng);
  return out;
}

LesionSpec class_spec(LesionClass label, std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(label) + 1);
  LesionSpec s;
  s.width = width;
  s.height = height;
  s.seed = seed;
  const double scale = std::min(width, height) / 240.0;
  s.cx = width / 2.0 + uniform_range(rng, -0.04, 0.04) * width;
  s.cy = height / 2.0 + uniform_range(rng, -0.04, 0.04) * height;
  s.angle = uniform_range(rng, 0.0, kPi);
  s.skin = {static_cast<std::uint8_t>(218 + uniform_below(rng, 16)),
            static_cast<std::uint8_t>(172 + uniform_below(rng, 16)),
            static_cast<std::uint8_t>(150 + uniform_below(rng, 16))};
  auto harmonics = [&](int count, int min_lobes, int max_lobes, double min_amp, double max_amp) {
    for (int i = 0; i < count; ++i) {
      s.border.push_back({static_cast<int>(min_lobes + uniform_below(rng, max_lobes - min_lobes + 1)),
                          uniform_range(rng, min_amp, max_amp), uniform_range(rng, 0.0, 2 * kPi)});
    }
  };
  switch (label) {
    case LesionClass::Normal:
      s.radius = uniform_range(rng, 42.0, 52.0) * scale;
      s.axis_ratio = uniform_range(rng, 1.0, 1.1);
      s.scheme = ColorScheme::Uniform;
      s.lesion = {static_cast<std::uint8_t>(170 + uniform_below(rng, 20)),
                  static_cast<std::uint8_t>(124 + uniform_below(rng, 20)),
                  static_cast<std::uint8_t>(78 + uniform_below(rng, 12))};
      harmonics(1, 2, 3, 0.0, 0.02);
      break;
    case LesionClass::Atypical:
      s.radius = uniform_range(rng, 58.0, 68.0) * scale;
      s.axis_ratio = uniform_range(rng, 1.35, 1.6);
      s.scheme = ColorScheme::TwoTone;
      s.lesion = {static_cast<std::uint8_t>(160 + uniform_below(rng, 20)),
                  static_cast<std::uint8_t>(112 + uniform_below(rng, 20)),
                  static_cast<std::uint8_t>(70 + uniform_below(rng, 12))};
      s.network_strength = uniform_range(rng, 0.15, 0.25);
      s.network_period = 9;
      harmonics(2, 3, 5, 0.04, 0.07);
      break;
    case LesionClass::Melanoma:
      s.radius = uniform_range(rng, 62.0, 72.0) * scale;
      s.axis_ratio = uniform_range(rng, 1.1, 1.3);
      s.scheme = ColorScheme::Variegated;
      s.lesion = {150, 100, 60};
      s.network_strength = uniform_range(rng, 0.45, 0.6);
      s.network_period = 6;
      harmonics(3, 5, 9, 0.06, 0.1);
      break;
  }
  return s;
}

SyntheticLesion make_lesion(LesionClass label, std::uint64_t seed, int hair_count) {
  LesionSpec s = class_spec(label, seed);
  s.hair_count = hair_count;
  return render(s);
}

RgbImage uniform_image(int width, int height, Rgb color) { return RgbImage(width, height, color); }

RgbImage disk_image(int width, int height, double cx, double cy, double radius, Rgb fg, Rgb bg) {
  const BinaryMask mask = disk_mask(width, height, cx, cy, radius);
  RgbImage img(width, height, bg);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (mask(x, y)) img(x, y) = fg;
    }
  }
  return img;
}

BinaryMask disk_mask(int width, int height, double cx, double cy, double radius) {
  BinaryMask mask(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      mask(x, y) = dx * dx + dy * dy < radius * radius ? 1 : 0;
    }
  }
  return mask;
}

std::vector<dataset::Ph2Record> write_dataset(const std::filesystem::path& dir, std::array<std::size_t, 3> counts,
                                              std::uint64_t seed, std::size_t hair_every, int width, int height) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  const fs::path base = fs::absolute(dir);
  std::vector<dataset::Ph2Record> records;
  std::size_t serial = 0;
  for (LesionClass c : classify::kAllClasses) {
    for (std::size_t i = 0; i < counts[static_cast<std::size_t>(c)]; ++i, ++serial) {
      char id[32];
      std::snprintf(id, sizeof id, "SYN%04zu", serial);
      LesionSpec s = class_spec(c, seed * 1000003ULL + serial, width, height);
      if (hair_every && serial % hair_every == hair_every - 1) s.hair_count = 3;
      const SyntheticLesion lesion = render(s);
      const fs::path image = base / "images" / (std::string(id) + ".png");
      const fs::path mask = base / "masks" / (std::string(id) + "_lesion.png");
      write_file(image, encode_png(lesion.image));
      write_file(mask, encode_mask_png(lesion.lesion_mask));
      records.push_back({id, image, mask, c});
    }
  }
  dataset::write_manifest(base / "manifest.csv", records);
  return records;
}

}  // namespace skincure::synth
