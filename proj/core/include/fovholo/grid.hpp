#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace fovholo {

using Complex = std::complex<double>;

/// Row-major 2D grid of doubles.
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Grid() = default;
  Grid(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Grid& o) const { return width == o.width && height == o.height; }
};

/// Row-major 2D grid of complex doubles.
struct CGrid {
  int width = 0;
  int height = 0;
  std::vector<Complex> data;

  CGrid() = default;
  CGrid(int w, int h, Complex fill = {})
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  Complex& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  Complex at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  size_t size() const { return data.size(); }
  bool same_shape(const CGrid& o) const { return width == o.width && height == o.height; }
};

/// Multi-channel nonnegative intensity image (1 or 3 channels).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Grid> channels;

  Image() = default;
  Image(int w, int h, int channel_count, double fill = 0.0) : width(w), height(h) {
    channels.assign(channel_count, Grid(w, h, fill));
  }

  int channel_count() const { return static_cast<int>(channels.size()); }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels.size() == o.channels.size();
  }
};

double grid_sum(const Grid& g);
double grid_mean(const Grid& g);
double grid_min(const Grid& g);
double grid_max(const Grid& g);
bool grid_all_finite(const Grid& g);

/// Mean squared difference over all pixels (grids must match in shape).
double grid_mse(const Grid& a, const Grid& b);
/// Mean squared difference over all pixels and channels.
double image_mse(const Image& a, const Image& b);
/// PSNR in dB for unit dynamic range; infinity for identical inputs.
double psnr_db(const Grid& a, const Grid& b);

void validate_image(const Image& img, const char* what);

}  // namespace fovholo
