#include "skincure/transforms.hpp"

#include <cmath>
#include <numbers>

namespace skincure::xform {
namespace {

bool is_power_of_two(std::size_t n) { return n && (n & (n - 1)) == 0; }

void naive_dft(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += data[t] * std::polar(1.0, angle);
    }
    out[k] = acc;
  }
  data.swap(out);
}

}  // namespace

void fft(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  if (!is_power_of_two(n)) {
    naive_dft(data);
    return;
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> dft2(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  std::vector<std::complex<double>> out(img.size());
  std::vector<std::complex<double>> line;

  line.resize(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) line[x] = img(x, y);
    fft(line);
    for (int x = 0; x < w; ++x) out[static_cast<std::size_t>(y) * w + x] = line[x];
  }
  line.resize(static_cast<std::size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) line[y] = out[static_cast<std::size_t>(y) * w + x];
    fft(line);
    for (int y = 0; y < h; ++y) out[static_cast<std::size_t>(y) * w + x] = line[y];
  }
  return out;
}

GrayImage dct2(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();

  auto basis = [](int n) {
    std::vector<double> table(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int t = 0; t < n; ++t) {
        table[static_cast<std::size_t>(k) * n + t] =
            scale * std::cos(std::numbers::pi * (2.0 * t + 1.0) * k / (2.0 * n));
      }
    }
    return table;
  };
  const std::vector<double> cx = basis(w);
  const std::vector<double> cy = basis(h);

  GrayImage rows(w, h);
  for (int y = 0; y < h; ++y) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      const double* c = &cx[static_cast<std::size_t>(u) * w];
      for (int x = 0; x < w; ++x) acc += c[x] * img(x, y);
      rows(u, y) = acc;
    }
  }
  GrayImage out(w, h);
  for (int u = 0; u < w; ++u) {
    for (int v = 0; v < h; ++v) {
      double acc = 0.0;
      const double* c = &cy[static_cast<std::size_t>(v) * h];
      for (int y = 0; y < h; ++y) acc += c[y] * rows(u, y);
      out(u, v) = acc;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> zigzag(int count) {
  std::vector<std::pair<int, int>> order;
  for (int s = 0; static_cast<int>(order.size()) < count; ++s) {
    // Even anti-diagonals run bottom-left to top-right, odd ones the reverse.
    for (int i = 0; i <= s && static_cast<int>(order.size()) < count; ++i) {
      const int row = (s % 2 == 0) ? s - i : i;
      order.emplace_back(s - row, row);
    }
  }
  return order;
}

}  // namespace skincure::xform
