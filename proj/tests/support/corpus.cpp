#include "support/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fovholo::testsupport {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Coarse random lattice, bilinearly upsampled.
Grid smooth_noise(int size, int cells, std::mt19937_64& rng) {
  const int n = std::max(cells, 2);
  Grid lattice(n + 1, n + 1);
  for (double& v : lattice.data) v = uniform01(rng);
  Grid out(size, size);
  for (int y = 0; y < size; ++y) {
    const double v = static_cast<double>(y) * n / size;
    const int y0 = std::min(static_cast<int>(v), n - 1);
    const double fy = v - y0;
    for (int x = 0; x < size; ++x) {
      const double u = static_cast<double>(x) * n / size;
      const int x0 = std::min(static_cast<int>(u), n - 1);
      const double fx = u - x0;
      out.at(x, y) = (1 - fx) * (1 - fy) * lattice.at(x0, y0) +
                     fx * (1 - fy) * lattice.at(x0 + 1, y0) +
                     (1 - fx) * fy * lattice.at(x0, y0 + 1) +
                     fx * fy * lattice.at(x0 + 1, y0 + 1);
    }
  }
  return out;
}

Grid fractal(int size, std::mt19937_64& rng) {
  Grid out(size, size, 0.0);
  double weight = 0.5, total = 0.0;
  for (int cells = 4; cells <= size / 4; cells *= 2) {
    Grid layer = smooth_noise(size, cells, rng);
    for (size_t i = 0; i < out.size(); ++i) out.data[i] += weight * layer.data[i];
    total += weight;
    weight *= 0.55;
  }
  for (double& v : out.data) v /= total;
  return out;
}

void add_disk(Grid& g, double cx, double cy, double r, double value) {
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      const double t = std::clamp((r - d) / (0.08 * r + 1.0), 0.0, 1.0);
      g.at(x, y) = (1 - t) * g.at(x, y) + t * value;
    }
}

void add_rect(Grid& g, int x0, int y0, int w, int h, double value, double blend = 1.0) {
  for (int y = std::max(0, y0); y < std::min(g.height, y0 + h); ++y)
    for (int x = std::max(0, x0); x < std::min(g.width, x0 + w); ++x)
      g.at(x, y) = (1 - blend) * g.at(x, y) + blend * value;
}

void add_grating(Grid& g, int x0, int y0, int w, int h, double period, double angle,
                 double amplitude) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int y = std::max(0, y0); y < std::min(g.height, y0 + h); ++y)
    for (int x = std::max(0, x0); x < std::min(g.width, x0 + w); ++x) {
      const double p = (x * ca + y * sa) * 2.0 * 3.14159265358979323846 / period;
      g.at(x, y) = std::clamp(g.at(x, y) + amplitude * std::sin(p), 0.0, 1.0);
    }
}

}  // namespace

Image corpus_image(int index, int size, int channels) {
  std::mt19937_64 rng(0xC0FFEEull + 977u * static_cast<uint64_t>(index));
  Image img(size, size, channels);

  for (int c = 0; c < channels; ++c) {
    Grid& g = img.channels[c];
    const double gx = uniform01(rng), gy = uniform01(rng);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        g.at(x, y) = 0.25 + 0.4 * (gx * x + gy * y) / size;

    Grid detail = fractal(size, rng);
    for (size_t i = 0; i < g.size(); ++i) g.data[i] += 0.35 * (detail.data[i] - 0.5);

    add_disk(g, size * (0.2 + 0.6 * uniform01(rng)), size * (0.2 + 0.6 * uniform01(rng)),
             size * (0.1 + 0.15 * uniform01(rng)), 0.15 + 0.7 * uniform01(rng));
    add_rect(g, static_cast<int>(size * 0.55), static_cast<int>(size * (0.1 + 0.2 * uniform01(rng))),
             size / 4, size / 5, 0.2 + 0.6 * uniform01(rng), 0.85);
    add_grating(g, static_cast<int>(size * 0.08), static_cast<int>(size * 0.6), size / 3,
                size / 4, 4.0 + 6.0 * uniform01(rng),
                (index % 2) ? 0.0 : 1.5707963267948966, 0.12);

    for (double& v : g.data) v = std::clamp(v, 0.02, 0.98);
  }
  return img;
}

FlatTarget flat_target(int size, int channels) {
  FlatTarget t;
  t.image = corpus_image(7, size, channels);
  t.w = std::max(8, size / 4);
  t.h = t.w;
  t.x = size / 8;
  t.y = size / 8;
  for (Grid& g : t.image.channels) add_rect(g, t.x, t.y, t.w, t.h, 0.5, 1.0);
  return t;
}

}  // namespace fovholo::testsupport
