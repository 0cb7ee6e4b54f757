#pragma once

// Shared test helpers and independent reference implementations.

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "skincure/classifier.hpp"
#include "skincure/image.hpp"
#include "skincure/synthetic.hpp"

namespace testing_support {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("skincure_test_" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  skincure::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string read_text(const fs::path& path) {
  const auto bytes = skincure::read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

inline skincure::GrayImage random_gray(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.0, 255.0);
  skincure::GrayImage img(w, h);
  for (double& v : img.pixels()) v = dist(rng);
  return img;
}

/// X[v][u] = sum_y sum_x f(x,y) exp(-2 pi i (ux/W + vy/H)), four nested loops.
inline std::vector<std::vector<std::complex<double>>> brute_dft2(const skincure::GrayImage& f) {
  const int w = f.width();
  const int h = f.height();
  std::vector<std::vector<std::complex<double>>> out(h, std::vector<std::complex<double>>(w));
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      std::complex<double> acc;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double angle = -2.0 * std::numbers::pi * (static_cast<double>(u) * x / w + static_cast<double>(v) * y / h);
          acc += f(x, y) * std::complex<double>(std::cos(angle), std::sin(angle));
        }
      }
      out[v][u] = acc;
    }
  }
  return out;
}

/// Orthonormal DCT-II by direct double summation per coefficient.
inline std::vector<std::vector<double>> brute_dct2(const skincure::GrayImage& f) {
  const int w = f.width();
  const int h = f.height();
  std::vector<std::vector<double>> out(h, std::vector<double>(w));
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double au = u == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
      const double av = v == 0 ? std::sqrt(1.0 / h) : std::sqrt(2.0 / h);
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          acc += f(x, y) * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * w)) *
                 std::cos(std::numbers::pi * (2 * y + 1) * v / (2.0 * h));
        }
      }
      out[v][u] = au * av * acc;
    }
  }
  return out;
}

/// Labels of the k nearest samples by full sort on (distance, index), then
/// the inverse-distance vote written out long-hand.
inline skincure::classify::Vote brute_vote(const std::vector<skincure::classify::LabeledVector>& samples, int k,
                                           const std::vector<double>& q) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) d += (samples[i].values[j] - q[j]) * (samples[i].values[j] - q[j]);
    all.emplace_back(std::sqrt(d), i);
  }
  std::sort(all.begin(), all.end());
  all.resize(static_cast<std::size_t>(k));
  const bool any_exact = std::any_of(all.begin(), all.end(), [](const auto& p) { return p.first == 0.0; });
  double pos = 0.0, neg = 0.0;
  for (const auto& [d, i] : all) {
    const double w = any_exact ? (d == 0.0 ? 1.0 : 0.0) : 1.0 / d;
    (samples[i].positive ? pos : neg) += w;
  }
  skincure::classify::Vote v;
  v.positive = pos >= neg;
  v.score = (v.positive ? pos : neg) / (pos + neg);
  return v;
}

/// Model trained once on a fixed synthetic set (10 images per class).
inline const skincure::classify::TwoLevelModel& fixture_model() {
  static const skincure::classify::TwoLevelModel model = [] {
    std::vector<skincure::features::FeatureVector> x;
    std::vector<skincure::classify::LesionClass> y;
    for (auto c : skincure::classify::kAllClasses) {
      for (std::uint64_t s = 0; s < 10; ++s) {
        x.push_back(skincure::features::extract_all(skincure::synth::make_lesion(c, 100 + s).image));
        y.push_back(c);
      }
    }
    return skincure::classify::train(x, y, 3);
  }();
  return model;
}

inline std::vector<std::uint8_t> png_bytes(const skincure::RgbImage& img) { return skincure::encode_png(img); }

}  // namespace testing_support
