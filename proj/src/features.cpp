#include "skincure/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "skincure/csv.hpp"
#include "skincure/geometry.hpp"
#include "skincure/morphology.hpp"
#include "skincure/transforms.hpp"

namespace skincure::features {
namespace {

void require_lesion(const SegmentationResult& seg, const FeatureConfig& cfg) {
  if (seg.area_px < cfg.min_area) {
    throw Error(ErrorCode::DegenerateLesion, "lesion area " + std::to_string(seg.area_px) + " px is below " +
                                                 std::to_string(cfg.min_area));
  }
}

struct Hsv {
  double h, s, v;
};

Hsv to_hsv(const Rgb& p) {
  const double r = p.r / 255.0, g = p.g / 255.0, b = p.b / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
  if (delta > 0.0) {
    double h = 0.0;
    if (mx == r) {
      h = std::fmod((g - b) / delta, 6.0);
    } else if (mx == g) {
      h = (b - r) / delta + 2.0;
    } else {
      h = (r - g) / delta + 4.0;
    }
    h /= 6.0;
    if (h < 0.0) h += 1.0;
    out.h = h;
  }
  return out;
}

struct Running {
  double n = 0.0, sum = 0.0, sum_sq = 0.0;
  void add(double x) {
    n += 1.0;
    sum += x;
    sum_sq += x * x;
  }
  double mean() const { return n > 0.0 ? sum / n : 0.0; }
  double stddev() const {
    if (n <= 0.0) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, sum_sq / n - m * m));
  }
};

double reflect_asymmetry(const BinaryMask& mask, const geom::Moments& m, double ax, double ay) {
  std::size_t unmatched = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      const double dx = x - m.cx;
      const double dy = y - m.cy;
      const double along = dx * ax + dy * ay;
      const int rx = static_cast<int>(std::lround(m.cx + 2.0 * along * ax - dx));
      const int ry = static_cast<int>(std::lround(m.cy + 2.0 * along * ay - dy));
      if (!mask.contains(rx, ry) || !mask(rx, ry)) ++unmatched;
    }
  }
  // |A xor R(A)| / 2A, with |A \ R(A)| = |R(A) \ A|.
  return static_cast<double>(unmatched) / m.area;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const FeatureConfig& default_feature_config() {
  static const FeatureConfig cfg;
  return cfg;
}

const std::array<ReferenceColor, 6>& reference_palette() {
  static const std::array<ReferenceColor, 6> palette = {{
      {"white", Rgb{255, 255, 255}},
      {"red", Rgb{204, 51, 51}},
      {"light brown", Rgb{181, 134, 84}},
      {"dark brown", Rgb{102, 51, 0}},
      {"blue-gray", Rgb{90, 110, 140}},
      {"black", Rgb{20, 20, 20}},
  }};
  return palette;
}

LesionCrop make_crop(const RgbImage& img, const SegmentationResult& seg, const FeatureConfig& cfg) {
  require_same_shape(img, seg.mask);
  const auto& b = seg.bbox;
  const GrayImage lum = to_luminance(img);
  GrayImage mask_f(seg.mask.width(), seg.mask.height());
  {
    auto s = seg.mask.pixels();
    auto d = mask_f.pixels();
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = s[i] ? 1.0 : 0.0;
  }
  LesionCrop crop{morph::resample_bilinear(lum, b.x0, b.y0, b.x1, b.y1, cfg.crop_size, cfg.crop_size),
                  BinaryMask(cfg.crop_size, cfg.crop_size)};
  const GrayImage m = morph::resample_bilinear(mask_f, b.x0, b.y0, b.x1, b.y1, cfg.crop_size, cfg.crop_size);
  auto src = m.pixels();
  auto dst = crop.mask.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= 0.5 ? 1 : 0;
  return crop;
}

int radial_band(int u, int v, int width, int height, int bands) {
  if (u == 0 && v == 0) return -1;
  const double fu = u <= width / 2 ? u : u - width;
  const double fv = v <= height / 2 ? v : v - height;
  const double r = std::hypot(fu, fv);
  const double r_max = std::hypot(width / 2.0, height / 2.0);
  return std::min(bands - 1, static_cast<int>(r / r_max * bands));
}

std::array<double, 8> radial_band_energies(const GrayImage& crop) {
  const auto spectrum = xform::dft2(crop);
  const int w = crop.width();
  const int h = crop.height();
  std::array<double, 8> bands{};
  double total = 0.0;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int b = radial_band(u, v, w, h, 8);
      if (b < 0) continue;
      const double m = std::log1p(std::abs(spectrum[static_cast<std::size_t>(v) * w + u]));
      bands[b] += m * m;
      total += m * m;
    }
  }
  if (total < 1e-10) return {};
  for (double& e : bands) e /= total;
  return bands;
}

std::array<double, 16> dct_zigzag_coefficients(const GrayImage& crop) {
  const GrayImage coeffs = xform::dct2(crop);
  const auto order = xform::zigzag(17);
  const double scale = std::abs(coeffs(0, 0)) + 1.0;
  std::array<double, 16> out{};
  for (std::size_t i = 0; i < 16; ++i) {
    const auto [u, v] = order[i + 1];
    out[i] = coeffs(u, v) / scale;
  }
  return out;
}

std::array<double, 8> fft_features(const RgbImage& img, const SegmentationResult& seg, const FeatureConfig& cfg) {
  require_lesion(seg, cfg);
  LesionCrop crop = make_crop(img, seg, cfg);
  double mean = 0.0;
  for (double v : crop.luminance.pixels()) mean += v;
  mean /= static_cast<double>(crop.luminance.size());
  auto lum = crop.luminance.pixels();
  auto mask = crop.mask.pixels();
  for (std::size_t i = 0; i < lum.size(); ++i) {
    if (!mask[i]) lum[i] = mean;
  }
  return radial_band_energies(crop.luminance);
}

std::array<double, 16> dct_features(const RgbImage& img, const SegmentationResult& seg, const FeatureConfig& cfg) {
  require_lesion(seg, cfg);
  return dct_zigzag_coefficients(make_crop(img, seg, cfg).luminance);
}

std::array<double, 5> complexity_features(const RgbImage& img, const SegmentationResult& seg,
                                          const FeatureConfig& cfg) {
  require_lesion(seg, cfg);
  require_same_shape(img, seg.mask);
  const BinaryMask& mask = seg.mask;
  const double area = static_cast<double>(seg.area_px);

  const auto contour = geom::trace_contour(mask);
  const double perimeter = geom::contour_length(contour);
  const double compactness = perimeter * perimeter / (4.0 * std::numbers::pi * area);

  const geom::Moments m = geom::moments(mask);
  const double theta = m.orientation();
  const double asym_major = reflect_asymmetry(mask, m, std::cos(theta), std::sin(theta));
  const double asym_minor = reflect_asymmetry(mask, m, -std::sin(theta), std::cos(theta));

  Running radial;
  for (const auto& p : contour) radial.add(std::hypot(p.x - m.cx, p.y - m.cy));
  const double irregularity = radial.mean() > 0.0 ? radial.stddev() / radial.mean() : 0.0;

  const double hull = geom::convex_hull_area(mask);
  const double deficiency = hull > 0.0 ? 1.0 - area / hull : 0.0;

  return {compactness, asym_major, asym_minor, irregularity, deficiency};
}

std::array<double, 16> color_features(const RgbImage& img, const SegmentationResult& seg,
                                      const FeatureConfig& cfg) {
  require_lesion(seg, cfg);
  require_same_shape(img, seg.mask);
  const auto& palette = reference_palette();
  std::array<Running, 6> channel;  // R, G, B, H, S, V
  std::array<std::size_t, 6> palette_hits{};
  const double match_sq = cfg.color_match_distance * cfg.color_match_distance;

  const GrayImage d2 = morph::squared_distance_to(seg.mask);
  const double ring_sq = cfg.ring_width * cfg.ring_width;
  std::array<Running, 3> ring;

  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb& p = img(x, y);
      if (!seg.mask(x, y)) {
        if (d2(x, y) <= ring_sq) {
          ring[0].add(p.r);
          ring[1].add(p.g);
          ring[2].add(p.b);
        }
        continue;
      }
      const Hsv hsv = to_hsv(p);
      channel[0].add(p.r);
      channel[1].add(p.g);
      channel[2].add(p.b);
      channel[3].add(hsv.h);
      channel[4].add(hsv.s);
      channel[5].add(hsv.v);
      for (std::size_t k = 0; k < palette.size(); ++k) {
        const double dr = double(p.r) - palette[k].rgb.r;
        const double dg = double(p.g) - palette[k].rgb.g;
        const double db = double(p.b) - palette[k].rgb.b;
        if (dr * dr + dg * dg + db * db <= match_sq) ++palette_hits[k];
      }
    }
  }

  std::array<double, 16> out{};
  for (std::size_t c = 0; c < 6; ++c) {
    out[2 * c] = channel[c].mean();
    out[2 * c + 1] = channel[c].stddev();
  }
  const double min_hits = cfg.color_presence_fraction * static_cast<double>(seg.area_px);
  double present = 0.0;
  for (std::size_t hits : palette_hits) present += static_cast<double>(hits) >= min_hits ? 1.0 : 0.0;
  out[12] = present;
  for (std::size_t c = 0; c < 3; ++c) {
    out[13 + c] = ring[c].n > 0.0 ? channel[c].mean() - ring[c].mean() : 0.0;
  }
  return out;
}

std::array<double, 2> pigment_network_features(const RgbImage& img, const SegmentationResult& seg,
                                               const FeatureConfig& cfg) {
  require_lesion(seg, cfg);
  const LesionCrop crop = make_crop(img, seg, cfg);
  const auto se = morph::disk_element(cfg.pigment_se_radius_sq);
  const GrayImage response = morph::black_hat(crop.luminance, se);

  std::vector<double> inside;
  auto r = response.pixels();
  auto m = crop.mask.pixels();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (m[i]) inside.push_back(r[i]);
  }
  if (inside.empty()) return {0.0, 0.0};
  const double peak = *std::max_element(inside.begin(), inside.end());
  if (peak < cfg.pigment_min_response) return {0.0, 0.0};
  const auto split = morph::otsu(inside);
  if (!split) return {0.0, 0.0};
  const double threshold = std::max(split->threshold, cfg.pigment_min_response);

  std::size_t count = 0;
  double strength = 0.0;
  for (double v : inside) {
    if (v > threshold) {
      ++count;
      strength += v;
    }
  }
  if (count == 0) return {0.0, 0.0};
  return {static_cast<double>(count) / static_cast<double>(inside.size()),
          std::clamp(strength / static_cast<double>(count) / 255.0, 0.0, 1.0)};
}

std::array<double, 8> shape_orientation_margin_intensity(const RgbImage& img, const SegmentationResult& seg,
                                                         const FeatureConfig& cfg) {
  require_lesion(seg, cfg);
  require_same_shape(img, seg.mask);
  const BinaryMask& mask = seg.mask;
  const double area = static_cast<double>(seg.area_px);

  const geom::Moments m = geom::moments(mask);
  const double extent = area / (static_cast<double>(seg.bbox.width()) * seg.bbox.height());
  const double hull = geom::convex_hull_area(mask);
  const double solidity = hull > 0.0 ? area / hull : 1.0;

  const GrayImage lum = to_luminance(img);

  // Mean gradient magnitude over the band straddling the boundary.
  const GrayImage to_bg = morph::squared_distance_to(morph::invert(mask));
  const GrayImage to_fg = morph::squared_distance_to(mask);
  const double band_sq = cfg.margin_half_band * cfg.margin_half_band;
  Running grad;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double d = mask(x, y) ? to_bg(x, y) : to_fg(x, y);
      if (d > band_sq) continue;
      const double gx = (lum.clamped(x + 1, y) - lum.clamped(x - 1, y)) / 2.0;
      const double gy = (lum.clamped(x, y + 1) - lum.clamped(x, y - 1)) / 2.0;
      grad.add(std::hypot(gx, gy));
    }
  }
  const double margin = grad.mean() / 255.0;

  // Intensity pattern of the lesion's luminance.
  Running stats;
  std::vector<double> hist(static_cast<std::size_t>(cfg.intensity_bins), 0.0);
  std::vector<double> values;
  values.reserve(seg.area_px);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask(x, y)) continue;
      const double v = lum(x, y) / 255.0;
      values.push_back(v);
      stats.add(v);
      const int bin = std::clamp(static_cast<int>(v * cfg.intensity_bins), 0, cfg.intensity_bins - 1);
      hist[static_cast<std::size_t>(bin)] += 1.0;
    }
  }
  const double mean = stats.mean();
  double m2 = 0.0, m3 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(values.size());
  m3 /= static_cast<double>(values.size());
  const double skew = m2 > 1e-12 ? m3 / std::pow(m2, 1.5) : 0.0;
  double entropy = 0.0;
  for (double c : hist) {
    if (c <= 0.0) continue;
    const double p = c / static_cast<double>(values.size());
    entropy -= p * std::log2(p);
  }

  return {extent, m.eccentricity(), solidity, m.orientation(), margin, m2, skew, entropy};
}

FeatureVector extract_features(const RgbImage& clean, const SegmentationResult& seg, const FeatureConfig& cfg) {
  require_lesion(seg, cfg);
  FeatureVector fv;
  fv.values.reserve(kFeatureCount);
  auto append = [&](const auto& block) { fv.values.insert(fv.values.end(), block.begin(), block.end()); };
  append(fft_features(clean, seg, cfg));
  append(dct_features(clean, seg, cfg));
  append(complexity_features(clean, seg, cfg));
  append(color_features(clean, seg, cfg));
  append(pigment_network_features(clean, seg, cfg));
  append(shape_orientation_margin_intensity(clean, seg, cfg));
  for (double v : fv.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateLesion, "non-finite feature value");
  }
  return fv;
}

LesionAnalysis analyze_lesion(const RgbImage& img, const PipelineConfig& pcfg, const FeatureConfig& fcfg) {
  LesionAnalysis out;
  const RgbImage limited = limit_resolution(img, pcfg);
  out.hair = detect_hair(limited, pcfg);
  out.clean = remove_hair(limited, out.hair);
  out.segmentation = segment_lesion(out.clean, pcfg);
  out.features = extract_features(out.clean, out.segmentation, fcfg);
  return out;
}

FeatureVector extract_all(const RgbImage& img) { return analyze_lesion(img).features; }

StandardizationStats fit_standardization(const std::vector<FeatureVector>& vectors) {
  if (vectors.size() < 2) throw Error(ErrorCode::InsufficientData, "standardisation needs at least two vectors");
  const std::size_t dim = vectors.front().values.size();
  const int layout = vectors.front().layout_version;
  StandardizationStats stats{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (const auto& v : vectors) {
    if (v.values.size() != dim || v.layout_version != layout) {
      throw Error(ErrorCode::LayoutMismatch, "feature vectors disagree on length or layout version");
    }
    for (std::size_t d = 0; d < dim; ++d) stats.mean[d] += v.values[d];
  }
  const double n = static_cast<double>(vectors.size());
  for (double& m : stats.mean) m /= n;
  for (const auto& v : vectors) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = v.values[d] - stats.mean[d];
      stats.std[d] += diff * diff;
    }
  }
  for (double& s : stats.std) s = std::sqrt(s / n);
  return stats;
}

FeatureVector apply_standardization(const StandardizationStats& stats, const FeatureVector& v) {
  if (v.values.size() != stats.mean.size()) {
    throw Error(ErrorCode::LayoutMismatch, "vector length does not match the standardisation statistics");
  }
  FeatureVector out{std::vector<double>(v.values.size()), v.layout_version};
  for (std::size_t d = 0; d < v.values.size(); ++d) {
    out.values[d] = stats.std[d] < kMinStd ? 0.0 : (v.values[d] - stats.mean[d]) / stats.std[d];
  }
  return out;
}

void write_feature_csv(const std::filesystem::path& path, const std::vector<NamedVector>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  csv::Row header{"image_id"};
  for (std::size_t i = 0; i < kFeatureCount; ++i) header.push_back("f" + std::to_string(i));
  header.push_back("layout_version");
  out << csv::join(header) << '\n';
  for (const auto& r : rows) {
    csv::Row row{r.image_id};
    for (double v : r.features.values) row.push_back(format_double(v));
    row.push_back(std::to_string(r.features.layout_version));
    out << csv::join(row) << '\n';
  }
}

std::vector<NamedVector> read_feature_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty() || rows.front().size() != kFeatureCount + 2 || rows.front().front() != "image_id") {
    throw Error(ErrorCode::BadHeader, "feature CSV header is not image_id,f0..f54,layout_version");
  }
  std::vector<NamedVector> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != kFeatureCount + 2) {
      throw Error(ErrorCode::LayoutMismatch, "feature CSV row " + std::to_string(i + 1) + " has wrong arity");
    }
    NamedVector nv{r.front(), {}};
    for (std::size_t k = 1; k <= kFeatureCount; ++k) nv.features.values.push_back(std::stod(r[k]));
    nv.features.layout_version = std::stoi(r.back());
    out.push_back(std::move(nv));
  }
  return out;
}

}  // namespace skincure::features
