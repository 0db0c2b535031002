#include "fovholo/grid.hpp"

#include <cmath>
#include <limits>

#include "fovholo/errors.hpp"

namespace fovholo {

double grid_sum(const Grid& g) {
  double s = 0.0;
  for (double v : g.data) s += v;
  return s;
}

double grid_mean(const Grid& g) {
  return g.data.empty() ? 0.0 : grid_sum(g) / static_cast<double>(g.size());
}

double grid_min(const Grid& g) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : g.data) m = std::min(m, v);
  return m;
}

double grid_max(const Grid& g) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : g.data) m = std::max(m, v);
  return m;
}

bool grid_all_finite(const Grid& g) {
  for (double v : g.data)
    if (!std::isfinite(v)) return false;
  return true;
}

double grid_mse(const Grid& a, const Grid& b) {
  if (!a.same_shape(b)) throw InvalidInput("grid_mse: shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return a.size() ? s / static_cast<double>(a.size()) : 0.0;
}

double image_mse(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw InvalidInput("image_mse: shape mismatch");
  double s = 0.0;
  for (int c = 0; c < a.channel_count(); ++c) s += grid_mse(a.channels[c], b.channels[c]);
  return s / a.channel_count();
}

double psnr_db(const Grid& a, const Grid& b) {
  const double mse = grid_mse(a, b);
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

void validate_image(const Image& img, const char* what) {
  if (img.width < 1 || img.height < 1 || img.channels.empty())
    throw InvalidInput(std::string(what) + ": empty image");
  if (img.channel_count() != 1 && img.channel_count() != 3)
    throw InvalidInput(std::string(what) + ": channel count must be 1 or 3");
  for (const Grid& c : img.channels) {
    if (c.width != img.width || c.height != img.height)
      throw InvalidInput(std::string(what) + ": channel shape mismatch");
    for (double v : c.data)
      if (!std::isfinite(v) || v < 0.0)
        throw InvalidInput(std::string(what) + ": values must be finite and nonnegative");
  }
}

}  // namespace fovholo
