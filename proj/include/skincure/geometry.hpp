#pragma once

#include <vector>

#include "skincure/image.hpp"

namespace skincure::geom {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Moore-neighbour trace of the outer 8-connected contour of the component
/// holding the first foreground pixel in raster order. Points are pixel
/// centres, clockwise on screen, without repeating the start.
std::vector<Point> trace_contour(const BinaryMask& mask);

/// Length of the closed contour: corrected chain-code estimate
/// (0.980 even + 1.406 odd - 0.091 corners) plus pi for the half-pixel
/// offset between pixel centres and the region's outer edge.
double contour_length(const std::vector<Point>& contour);

/// Area of the convex hull of the foreground pixels taken as unit squares.
double convex_hull_area(const BinaryMask& mask);

struct Moments {
  double area = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double mu20 = 0.0;  // central, normalised by area
  double mu02 = 0.0;
  double mu11 = 0.0;

  double major_eigen() const noexcept;
  double minor_eigen() const noexcept;
  /// Angle of the major axis from +x towards +y (image rows), in [0, pi).
  double orientation() const noexcept;
  /// sqrt(1 - minor/major); 0 for a disk, -> 1 for a line.
  double eccentricity() const noexcept;
};

Moments moments(const BinaryMask& mask);

}  // namespace skincure::geom
