#include "skincure/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace skincure::geom {
namespace {

// Clockwise on screen (y grows downwards), starting west.
constexpr std::array<Point, 8> kDirs = {
    {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int dir_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i) {
    if (kDirs[i].x == dx && kDirs[i].y == dy) return i;
  }
  return 0;
}

double cross(const Point& o, const Point& a, const Point& b) {
  return double(a.x - o.x) * double(b.y - o.y) - double(a.y - o.y) * double(b.x - o.x);
}

}  // namespace

std::vector<Point> trace_contour(const BinaryMask& mask) {
  std::vector<Point> contour;
  Point start{-1, -1};
  for (int y = 0; y < mask.height() && start.x < 0; ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) {
        start = {x, y};
        break;
      }
    }
  }
  if (start.x < 0) return contour;

  auto fg = [&](Point p) { return mask.contains(p.x, p.y) && mask(p.x, p.y) != 0; };

  contour.push_back(start);
  Point cur = start;
  Point back{start.x - 1, start.y};  // known background (raster order)
  const Point start_back = back;
  const std::size_t limit = 4 * mask.size() + 8;
  for (std::size_t iter = 0; iter < limit; ++iter) {
    const int k = dir_index(back.x - cur.x, back.y - cur.y);
    bool found = false;
    for (int i = 1; i <= 8; ++i) {
      const int d = (k + i) % 8;
      const Point n{cur.x + kDirs[d].x, cur.y + kDirs[d].y};
      if (fg(n)) {
        const int pd = (k + i - 1) % 8;
        back = {cur.x + kDirs[pd].x, cur.y + kDirs[pd].y};
        cur = n;
        found = true;
        break;
      }
    }
    if (!found) break;  // isolated pixel
    // Jacob's criterion: stop only when re-entering the start the same way.
    if (cur == start && back == start_back) break;
    contour.push_back(cur);
  }
  if (contour.size() > 1 && contour.back() == start) contour.pop_back();
  return contour;
}

double contour_length(const std::vector<Point>& contour) {
  if (contour.size() < 2) return contour.empty() ? 0.0 : std::numbers::pi;
  int even = 0;
  int odd = 0;
  int corners = 0;
  int prev_code = -1;
  int first_code = -1;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    const Point& a = contour[i];
    const Point& b = contour[(i + 1) % contour.size()];
    const int dx = b.x - a.x;
    const int dy = b.y - a.y;
    const int code = dir_index(dx, dy);
    if (dx != 0 && dy != 0) {
      ++odd;
    } else {
      ++even;
    }
    if (prev_code >= 0 && code != prev_code) ++corners;
    if (first_code < 0) first_code = code;
    prev_code = code;
  }
  if (prev_code != first_code) ++corners;
  return 0.980 * even + 1.406 * odd - 0.091 * corners + std::numbers::pi;
}

double convex_hull_area(const BinaryMask& mask) {
  std::vector<Point> pts;
  for (int y = 0; y < mask.height(); ++y) {
    int lo = -1, hi = -1;
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) {
        if (lo < 0) lo = x;
        hi = x;
      }
    }
    if (lo < 0) continue;
    pts.push_back({lo, y});
    pts.push_back({lo, y + 1});
    pts.push_back({hi + 1, y});
    pts.push_back({hi + 1, y + 1});
  }
  if (pts.size() < 3) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // Andrew's monotone chain.
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const Point& p = pts[i];
    while (k >= t && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);

  double area2 = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % hull.size()];
    area2 += double(a.x) * b.y - double(b.x) * a.y;
  }
  return std::abs(area2) / 2.0;
}

double Moments::major_eigen() const noexcept {
  const double disc = std::sqrt(std::max(0.0, (mu20 - mu02) * (mu20 - mu02) + 4.0 * mu11 * mu11));
  return 0.5 * (mu20 + mu02 + disc);
}

double Moments::minor_eigen() const noexcept {
  const double disc = std::sqrt(std::max(0.0, (mu20 - mu02) * (mu20 - mu02) + 4.0 * mu11 * mu11));
  return std::max(0.0, 0.5 * (mu20 + mu02 - disc));
}

double Moments::orientation() const noexcept {
  double theta = 0.5 * std::atan2(2.0 * mu11, mu20 - mu02);
  if (theta < 0.0) theta += std::numbers::pi;
  if (theta >= std::numbers::pi) theta -= std::numbers::pi;
  return theta;
}

double Moments::eccentricity() const noexcept {
  const double major = major_eigen();
  if (major <= 0.0) return 0.0;
  return std::sqrt(std::max(0.0, 1.0 - minor_eigen() / major));
}

Moments moments(const BinaryMask& mask) {
  Moments m;
  double sx = 0.0, sy = 0.0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      m.area += 1.0;
      sx += x;
      sy += y;
    }
  }
  if (m.area == 0.0) return m;
  m.cx = sx / m.area;
  m.cy = sy / m.area;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      const double dx = x - m.cx;
      const double dy = y - m.cy;
      m.mu20 += dx * dx;
      m.mu02 += dy * dy;
      m.mu11 += dx * dy;
    }
  }
  m.mu20 /= m.area;
  m.mu02 /= m.area;
  m.mu11 /= m.area;
  return m;
}

}  // namespace skincure::geom
