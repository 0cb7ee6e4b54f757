#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "skincure/image.hpp"

namespace skincure::xform {

/// In-place 1-D DFT (forward, unnormalised). Radix-2 for power-of-two sizes,
/// direct summation otherwise.
void fft(std::vector<std::complex<double>>& data);

/// Row-major 2-D DFT of a real image, X[v*W + u] = sum f(x,y) e^{-2 pi i (ux/W + vy/H)}.
std::vector<std::complex<double>> dft2(const GrayImage& img);

/// Orthonormal type-II 2-D DCT (same scaling as scipy's norm="ortho"),
/// computed separably. Result indexed (u, v) = (horizontal, vertical) frequency.
GrayImage dct2(const GrayImage& img);

/// The first `count` positions of the JPEG zig-zag scan as (u, v) =
/// (column, row) frequency, starting at DC.
std::vector<std::pair<int, int>> zigzag(int count);

}  // namespace skincure::xform
