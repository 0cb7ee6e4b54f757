#include "skincure/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "skincure/morphology.hpp"

namespace skincure {
namespace {

void require_min_dimension(const RgbImage& img, const PipelineConfig& cfg) {
  if (img.width() < cfg.min_dimension || img.height() < cfg.min_dimension) {
    throw Error(ErrorCode::ImageTooSmall, "image must be at least " + std::to_string(cfg.min_dimension) +
                                              " px on each side, got " + std::to_string(img.width()) + "x" +
                                              std::to_string(img.height()));
  }
}

}  // namespace

const PipelineConfig& default_pipeline_config() {
  static const PipelineConfig cfg;
  return cfg;
}

BinaryMask detect_hair(const RgbImage& img, const PipelineConfig& cfg) {
  require_min_dimension(img, cfg);
  const GrayImage lum = to_luminance(img);

  GrayImage response(img.width(), img.height(), 0.0);
  for (double angle : cfg.hair_angles_deg) {
    const auto se = morph::line_element(cfg.hair_line_length, angle);
    const GrayImage bh = morph::black_hat(lum, se);
    auto r = response.pixels();
    auto b = bh.pixels();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::max(r[i], b[i]);
  }

  BinaryMask hair(img.width(), img.height());
  const auto split = morph::otsu(response.pixels());
  if (!split) return hair;
  const double threshold = std::max(split->threshold, cfg.hair_min_response);

  BinaryMask candidates(img.width(), img.height());
  {
    auto r = response.pixels();
    auto c = candidates.pixels();
    for (std::size_t i = 0; i < r.size(); ++i) c[i] = r[i] > threshold ? 1 : 0;
  }

  const morph::Components comps = morph::label_components(candidates, 8);

  // Elongation as area over squared inscribed width: length/width for a bar,
  // and still large for crossing hairs, whose moments look compact.
  const GrayImage inner = morph::squared_distance_to(morph::invert(candidates));
  std::vector<double> max_inner(comps.stats.size() + 1, 0.0);
  {
    auto l = comps.labels.pixels();
    auto d = inner.pixels();
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (l[i]) max_inner[l[i]] = std::max(max_inner[l[i]], d[i]);
    }
  }
  std::vector<std::uint8_t> keep(comps.stats.size() + 1, 0);
  for (std::size_t i = 0; i < comps.stats.size(); ++i) {
    const auto& st = comps.stats[i];
    const double half_width = std::max(0.5, std::sqrt(max_inner[i + 1]) - 0.5);
    const double elongation = static_cast<double>(st.area) / (4.0 * half_width * half_width);
    keep[i + 1] = st.area >= cfg.hair_min_area && elongation >= cfg.hair_min_elongation;
  }
  auto l = comps.labels.pixels();
  auto h = hair.pixels();
  for (std::size_t i = 0; i < l.size(); ++i) h[i] = keep[static_cast<std::size_t>(l[i])];
  return hair;
}

RgbImage remove_hair(const RgbImage& img, const BinaryMask& hair) {
  require_same_shape(img, hair);
  RgbImage out = img;
  BinaryMask known = morph::invert(hair);

  struct Fill {
    int x, y;
    Rgb value;
  };
  std::vector<std::pair<int, int>> pending;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (hair(x, y)) pending.emplace_back(x, y);
    }
  }

  std::vector<Fill> fills;
  std::vector<std::pair<int, int>> still;
  while (!pending.empty()) {
    fills.clear();
    still.clear();
    for (const auto& [x, y] : pending) {
      int r = 0, g = 0, b = 0, n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx || dy) && known.contains(x + dx, y + dy) && known(x + dx, y + dy)) {
            const Rgb& p = out(x + dx, y + dy);
            r += p.r;
            g += p.g;
            b += p.b;
            ++n;
          }
        }
      }
      if (n == 0) {
        still.emplace_back(x, y);
        continue;
      }
      fills.push_back({x, y,
                       Rgb{static_cast<std::uint8_t>((r + n / 2) / n), static_cast<std::uint8_t>((g + n / 2) / n),
                           static_cast<std::uint8_t>((b + n / 2) / n)}});
    }
    if (fills.empty()) break;  // nothing known anywhere: leave the rest as is
    for (const auto& f : fills) {
      out(f.x, f.y) = f.value;
      known(f.x, f.y) = 1;
    }
    pending.swap(still);
  }
  return out;
}

SegmentationResult describe_mask(BinaryMask mask) {
  SegmentationResult seg;
  const int w = mask.width();
  const int h = mask.height();
  seg.bbox = {w, h, -1, -1};
  double sx = 0.0, sy = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      ++seg.area_px;
      sx += x;
      sy += y;
      seg.bbox.x0 = std::min(seg.bbox.x0, x);
      seg.bbox.y0 = std::min(seg.bbox.y0, y);
      seg.bbox.x1 = std::max(seg.bbox.x1, x);
      seg.bbox.y1 = std::max(seg.bbox.y1, y);
    }
  }
  if (seg.area_px > 0) {
    seg.centroid_x = sx / static_cast<double>(seg.area_px);
    seg.centroid_y = sy / static_cast<double>(seg.area_px);
  } else {
    seg.bbox = {};
  }
  std::size_t edge = 0;
  std::size_t touched = 0;
  for (int x = 0; x < w; ++x) {
    touched += mask(x, 0) != 0;
    touched += h > 1 && mask(x, h - 1) != 0;
    edge += h > 1 ? 2 : 1;
  }
  for (int y = 1; y + 1 < h; ++y) {
    touched += mask(0, y) != 0;
    touched += w > 1 && mask(w - 1, y) != 0;
    edge += w > 1 ? 2 : 1;
  }
  seg.border_touch_fraction = edge ? static_cast<double>(touched) / static_cast<double>(edge) : 0.0;
  seg.mask = std::move(mask);
  return seg;
}

SegmentationResult segment_lesion(const RgbImage& img, const PipelineConfig& cfg) {
  require_min_dimension(img, cfg);
  const int w = img.width();
  const int h = img.height();
  const GrayImage lum = to_luminance(morph::median_filter(img, cfg.median_size));

  std::vector<double> sample;
  if (cfg.threshold_on_inscribed_ellipse) {
    const double ax = w / 2.0, ay = h / 2.0;
    sample.reserve(lum.size());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double u = (x + 0.5 - ax) / ax;
        const double v = (y + 0.5 - ay) / ay;
        if (u * u + v * v <= 1.0) sample.push_back(lum(x, y));
      }
    }
  } else {
    sample.assign(lum.pixels().begin(), lum.pixels().end());
  }
  const auto split = morph::otsu(sample);
  if (!split || split->mean_high - split->mean_low < cfg.min_contrast) {
    throw Error(ErrorCode::NoLesionFound, "no bimodal intensity structure in the frame");
  }

  BinaryMask dark(w, h);
  {
    auto l = lum.pixels();
    auto d = dark.pixels();
    for (std::size_t i = 0; i < l.size(); ++i) d[i] = l[i] <= split->threshold ? 1 : 0;
  }
  const BinaryMask filled = morph::fill_holes(morph::close_disk(dark, cfg.closing_radius));

  const morph::Components comps = morph::label_components(filled, 8);
  const double margin = (1.0 - cfg.center_fraction) / 2.0;
  const double cx0 = margin * w, cx1 = (1.0 - margin) * w;
  const double cy0 = margin * h, cy1 = (1.0 - margin) * h;
  int best = 0;
  std::size_t best_area = 0;
  for (std::size_t i = 0; i < comps.stats.size(); ++i) {
    const auto& st = comps.stats[i];
    const bool central = st.cx >= cx0 && st.cx <= cx1 && st.cy >= cy0 && st.cy <= cy1;
    if (central && st.area > best_area) {
      best = static_cast<int>(i) + 1;
      best_area = st.area;
    }
  }
  if (best == 0) throw Error(ErrorCode::NoLesionFound, "no dark region near the centre of the frame");

  SegmentationResult seg = describe_mask(morph::select_component(comps, best));
  if (seg.border_touch_fraction > cfg.max_border_touch) {
    throw Error(ErrorCode::LesionTouchesBorder,
                "lesion covers " + std::to_string(seg.border_touch_fraction) + " of the frame edge");
  }
  return seg;
}

double mask_dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  std::size_t na = 0, nb = 0, both = 0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const bool x = pa[i] != 0;
    const bool y = pb[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

RgbImage limit_resolution(const RgbImage& img, const PipelineConfig& cfg) {
  const int longest = std::max(img.width(), img.height());
  if (longest <= cfg.max_side) return img;
  const int factor = (longest + cfg.max_side - 1) / cfg.max_side;
  return morph::downscale(img, factor);
}

}  // namespace skincure
