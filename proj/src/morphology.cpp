#include "skincure/morphology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace skincure::morph {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Pick>
GrayImage rank_filter(const GrayImage& src, std::span<const Offset> se, Pick pick) {
  GrayImage out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      // Out-of-frame offsets are skipped so closing stays extensive at the border.
      std::optional<double> acc;
      for (const auto& o : se) {
        if (!src.contains(x + o.dx, y + o.dy)) continue;
        const double v = src(x + o.dx, y + o.dy);
        acc = acc ? pick(*acc, v) : v;
      }
      out(x, y) = acc.value_or(src(x, y));
    }
  }
  return out;
}

// Felzenszwalb & Huttenlocher lower envelope of parabolas, in place on f.
void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  int first = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] < kInf) {
      first = q;
      break;
    }
  }
  if (first < 0) return;  // all infinite: leave as is
  v[0] = first;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = first + 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
  f.swap(d);
}

}  // namespace

std::vector<Offset> line_element(int length, double angle_deg) {
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const int half = length / 2;
  std::vector<Offset> se;
  for (int k = -half; k <= length - 1 - half; ++k) {
    // y axis points down, so a positive angle rises to the right.
    se.push_back({static_cast<int>(std::lround(k * c)), static_cast<int>(std::lround(-k * s))});
  }
  return se;
}

std::vector<Offset> disk_element(double radius_sq) {
  std::vector<Offset> se;
  const int r = static_cast<int>(std::floor(std::sqrt(radius_sq)));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= radius_sq) se.push_back({dx, dy});
    }
  }
  return se;
}

GrayImage dilate(const GrayImage& src, std::span<const Offset> se) {
  return rank_filter(src, se, [](double a, double b) { return std::max(a, b); });
}

GrayImage erode(const GrayImage& src, std::span<const Offset> se) {
  return rank_filter(src, se, [](double a, double b) { return std::min(a, b); });
}

GrayImage close(const GrayImage& src, std::span<const Offset> se) {
  // Erode with the reflected element so the result is a proper closing.
  std::vector<Offset> reflected(se.begin(), se.end());
  for (auto& o : reflected) o = {-o.dx, -o.dy};
  return erode(dilate(src, se), reflected);
}

GrayImage black_hat(const GrayImage& src, std::span<const Offset> se) {
  GrayImage out = close(src, se);
  auto o = out.pixels();
  auto s = src.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= s[i];
  return out;
}

GrayImage squared_distance_to(const BinaryMask& target) {
  const int w = target.width();
  const int h = target.height();
  GrayImage dist(w, h);
  const int n = std::max(w, h);
  std::vector<double> f(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  for (int x = 0; x < w; ++x) {
    f.resize(static_cast<std::size_t>(h));
    d.resize(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) f[y] = target(x, y) ? 0.0 : kInf;
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) dist(x, y) = f[y];
  }
  for (int y = 0; y < h; ++y) {
    f.resize(static_cast<std::size_t>(w));
    d.resize(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x) f[x] = dist(x, y);
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) dist(x, y) = f[x];
  }
  return dist;
}

BinaryMask invert(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  auto s = mask.pixels();
  auto o = out.pixels();
  for (std::size_t i = 0; i < s.size(); ++i) o[i] = s[i] ? 0 : 1;
  return out;
}

BinaryMask dilate_disk(const BinaryMask& mask, double radius) {
  const GrayImage d2 = squared_distance_to(mask);
  BinaryMask out(mask.width(), mask.height());
  const double r2 = radius * radius;
  auto d = d2.pixels();
  auto o = out.pixels();
  for (std::size_t i = 0; i < d.size(); ++i) o[i] = d[i] <= r2 ? 1 : 0;
  return out;
}

BinaryMask erode_disk(const BinaryMask& mask, double radius) {
  const GrayImage d2 = squared_distance_to(invert(mask));
  BinaryMask out(mask.width(), mask.height());
  const double r2 = radius * radius;
  auto d = d2.pixels();
  auto o = out.pixels();
  for (std::size_t i = 0; i < d.size(); ++i) o[i] = d[i] > r2 ? 1 : 0;
  return out;
}

BinaryMask close_disk(const BinaryMask& mask, double radius) {
  return erode_disk(dilate_disk(mask, radius), radius);
}

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  BinaryMask outside(w, h);
  std::vector<std::pair<int, int>> stack;
  auto seed = [&](int x, int y) {
    if (!mask(x, y) && !outside(x, y)) {
      outside(x, y) = 1;
      stack.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }
  BinaryMask out(w, h);
  auto o = out.pixels();
  auto bg = outside.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = bg[i] ? 0 : 1;
  return out;
}

double ComponentStats::elongation() const noexcept {
  const double tr = mu20 + mu02;
  const double disc = std::sqrt(std::max(0.0, (mu20 - mu02) * (mu20 - mu02) + 4.0 * mu11 * mu11));
  const double major = 0.5 * (tr + disc);
  const double minor = 0.5 * (tr - disc);
  if (minor <= 1e-12) return std::numeric_limits<double>::infinity();
  return std::sqrt(major / minor);
}

Components label_components(const BinaryMask& mask, int connectivity) {
  const int w = mask.width();
  const int h = mask.height();
  Components out{Image<int>(w, h), {}};
  static constexpr std::array<Offset, 8> kNeighbors8 = {
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
  const std::size_t nbrs = connectivity == 4 ? 4 : 8;
  std::vector<std::pair<int, int>> stack;
  std::vector<std::pair<int, int>> members;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y) || out.labels(x, y)) continue;
      const int label = static_cast<int>(out.stats.size()) + 1;
      members.clear();
      out.labels(x, y) = label;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        const auto [px, py] = stack.back();
        stack.pop_back();
        members.emplace_back(px, py);
        for (std::size_t k = 0; k < nbrs; ++k) {
          const int nx = px + kNeighbors8[k].dx;
          const int ny = py + kNeighbors8[k].dy;
          if (mask.contains(nx, ny) && mask(nx, ny) && !out.labels(nx, ny)) {
            out.labels(nx, ny) = label;
            stack.emplace_back(nx, ny);
          }
        }
      }
      ComponentStats st;
      st.area = members.size();
      st.x0 = st.x1 = x;
      st.y0 = st.y1 = y;
      double sx = 0.0, sy = 0.0;
      for (const auto& [mx, my] : members) {
        sx += mx;
        sy += my;
        st.x0 = std::min(st.x0, mx);
        st.x1 = std::max(st.x1, mx);
        st.y0 = std::min(st.y0, my);
        st.y1 = std::max(st.y1, my);
      }
      const double n = static_cast<double>(st.area);
      st.cx = sx / n;
      st.cy = sy / n;
      for (const auto& [mx, my] : members) {
        const double dx = mx - st.cx;
        const double dy = my - st.cy;
        st.mu20 += dx * dx;
        st.mu02 += dy * dy;
        st.mu11 += dx * dy;
      }
      st.mu20 /= n;
      st.mu02 /= n;
      st.mu11 /= n;
      out.stats.push_back(st);
    }
  }
  return out;
}

BinaryMask select_component(const Components& comps, int label) {
  BinaryMask out(comps.labels.width(), comps.labels.height());
  auto l = comps.labels.pixels();
  auto o = out.pixels();
  for (std::size_t i = 0; i < l.size(); ++i) o[i] = l[i] == label ? 1 : 0;
  return out;
}

std::optional<OtsuResult> otsu(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return std::nullopt;

  constexpr int kBins = 256;
  const double scale = kBins / (hi - lo);
  std::array<double, kBins> count{};
  std::array<double, kBins> sum{};
  for (double v : values) {
    const int b = std::min(kBins - 1, static_cast<int>((v - lo) * scale));
    count[b] += 1.0;
    sum[b] += v;
  }
  const double total_n = static_cast<double>(values.size());
  double total_sum = 0.0;
  for (double s : sum) total_sum += s;

  double best = -1.0;
  int best_bin = 0;
  double n0 = 0.0, s0 = 0.0;
  for (int b = 0; b < kBins - 1; ++b) {
    n0 += count[b];
    s0 += sum[b];
    const double n1 = total_n - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double m0 = s0 / n0;
    const double m1 = (total_sum - s0) / n1;
    const double between = n0 * n1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = b;
    }
  }
  if (best < 0.0) return std::nullopt;

  OtsuResult r;
  r.threshold = lo + (best_bin + 1) / scale;
  double c0 = 0.0, c1 = 0.0, m0 = 0.0, m1 = 0.0;
  for (int b = 0; b < kBins; ++b) {
    if (b <= best_bin) {
      c0 += count[b];
      m0 += sum[b];
    } else {
      c1 += count[b];
      m1 += sum[b];
    }
  }
  r.mean_low = m0 / c0;
  r.mean_high = m1 / c1;
  // Bin edges are approximate; make the split consistent with the reported means.
  r.threshold = std::min(std::max(r.threshold, r.mean_low), r.mean_high);
  return r;
}

RgbImage median_filter(const RgbImage& img, int size) {
  const int half = size / 2;
  RgbImage out(img.width(), img.height());
  const std::size_t n = static_cast<std::size_t>(size) * static_cast<std::size_t>(size);
  std::vector<std::uint8_t> r(n), g(n), b(n);
  const auto mid = static_cast<std::ptrdiff_t>(n / 2);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      std::size_t k = 0;
      for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
          const Rgb& p = img.clamped(x + dx, y + dy);
          r[k] = p.r;
          g[k] = p.g;
          b[k] = p.b;
          ++k;
        }
      }
      std::nth_element(r.begin(), r.begin() + mid, r.end());
      std::nth_element(g.begin(), g.begin() + mid, g.end());
      std::nth_element(b.begin(), b.begin() + mid, b.end());
      out(x, y) = Rgb{r[n / 2], g[n / 2], b[n / 2]};
    }
  }
  return out;
}

GrayImage resample_bilinear(const GrayImage& src, int x0, int y0, int x1, int y1, int out_w, int out_h) {
  GrayImage out(out_w, out_h);
  const double sx = static_cast<double>(x1 - x0 + 1) / out_w;
  const double sy = static_cast<double>(y1 - y0 + 1) / out_h;
  for (int j = 0; j < out_h; ++j) {
    const double fy = std::clamp(y0 + (j + 0.5) * sy - 0.5, double(y0), double(y1));
    const int iy = static_cast<int>(std::floor(fy));
    const double ty = fy - iy;
    for (int i = 0; i < out_w; ++i) {
      const double fx = std::clamp(x0 + (i + 0.5) * sx - 0.5, double(x0), double(x1));
      const int ix = static_cast<int>(std::floor(fx));
      const double tx = fx - ix;
      const double a = src.clamped(ix, iy);
      const double b = src.clamped(ix + 1, iy);
      const double c = src.clamped(ix, iy + 1);
      const double d = src.clamped(ix + 1, iy + 1);
      out(i, j) = (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }
  }
  return out;
}

RgbImage downscale(const RgbImage& img, int factor) {
  if (factor <= 1) return img;
  const int w = std::max(1, img.width() / factor);
  const int h = std::max(1, img.height() / factor);
  RgbImage out(w, h);
  const int n = factor * factor;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int r = 0, g = 0, b = 0;
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          const Rgb& p = img.clamped(x * factor + dx, y * factor + dy);
          r += p.r;
          g += p.g;
          b += p.b;
        }
      }
      out(x, y) = Rgb{static_cast<std::uint8_t>((r + n / 2) / n), static_cast<std::uint8_t>((g + n / 2) / n),
                      static_cast<std::uint8_t>((b + n / 2) / n)};
    }
  }
  return out;
}

}  // namespace skincure::morph
