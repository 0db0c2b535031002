#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fovholo/grid.hpp"

namespace fovholo {

double srgb_to_linear(double s);
double linear_to_srgb(double l);

struct LoadedImage {
  Image image;
  int bit_depth = 8;  // source depth (8 or 16)
};

/// Loads an 8/16-bit grayscale or RGB(A) PNG into [0,1] doubles; alpha is
/// dropped. With linearize=true the sRGB EOTF is applied per sample.
LoadedImage load_image_png(const std::string& path, bool linearize);

/// Saves an image as 8- or 16-bit PNG (grayscale for 1 channel, RGB for 3),
/// clamping to [0,1]; with encode=true values are sRGB-encoded first.
void save_image_png(const std::string& path, const Image& img, int bit_depth, bool encode);

/// Raw 8-bit grayscale code planes (no transfer function), for phase files.
void save_gray8_png(const std::string& path, const std::vector<uint8_t>& codes, int width,
                    int height);
std::vector<uint8_t> load_gray8_png(const std::string& path, int* width, int* height);

/// Raw float dump: a single text header line
///   f32 width=<w> height=<h> channels=<c> order=planar-row-major
/// followed by little-endian 32-bit floats, channel-planar, row-major.
void save_raw_f32(const std::string& path, const Image& img);
Image load_raw_f32(const std::string& path);

/// Catmull-Rom bicubic resampling (clamped edges).
Image resize_bicubic(const Image& img, int width, int height);

}  // namespace fovholo
