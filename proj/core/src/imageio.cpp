#include "fovholo/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "fovholo/errors.hpp"

namespace fovholo {

double srgb_to_linear(double s) {
  return s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double l) {
  return l <= 0.0031308 ? 12.92 * l : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void quiet_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void quiet_warning(png_structp, png_const_charp) {}

struct PngRead {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngRead() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWrite {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWrite() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

// Reads any supported PNG into 8- or 16-bit samples, gray or RGB.
void read_png_samples(const std::string& path, std::vector<uint16_t>& samples, int* width,
                      int* height, int* channels, int* bit_depth) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw FormatError("cannot open PNG file: " + path);

  PngRead ctx;
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_error, quiet_warning);
  if (!ctx.png) throw FormatError("png_create_read_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw FormatError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw FormatError("corrupt PNG file: " + path);

  png_init_io(ctx.png, f.get());
  png_read_info(ctx.png, ctx.info);

  const int depth = png_get_bit_depth(ctx.png, ctx.info);
  const int color = png_get_color_type(ctx.png, ctx.info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(ctx.png);
  if (depth == 16) png_set_swap(ctx.png);  // deliver little-endian

  png_read_update_info(ctx.png, ctx.info);

  *width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  *height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  *channels = png_get_channels(ctx.png, ctx.info);
  *bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  if (*channels != 1 && *channels != 3)
    throw FormatError("unsupported PNG channel count in " + path);

  const size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
  std::vector<uint8_t> raw(static_cast<size_t>(*height) * rowbytes);
  std::vector<png_bytep> rows(*height);
  for (int y = 0; y < *height; ++y) rows[y] = raw.data() + static_cast<size_t>(y) * rowbytes;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);

  const size_t n = static_cast<size_t>(*width) * *height * *channels;
  samples.resize(n);
  if (*bit_depth == 16) {
    std::memcpy(samples.data(), raw.data(), n * sizeof(uint16_t));
  } else {
    for (size_t i = 0; i < n; ++i) samples[i] = raw[i];
  }
}

void write_png_samples(const std::string& path, const std::vector<uint16_t>& samples,
                       int width, int height, int channels, int bit_depth) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw FormatError("cannot create PNG file: " + path);

  PngWrite ctx;
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, quiet_error, quiet_warning);
  if (!ctx.png) throw FormatError("png_create_write_struct failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw FormatError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw FormatError("PNG write failed: " + path);

  png_init_io(ctx.png, f.get());
  const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(ctx.png, ctx.info, width, height, bit_depth, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  if (bit_depth == 16) png_set_swap(ctx.png);

  const size_t stride = static_cast<size_t>(width) * channels;
  std::vector<uint8_t> row8;
  std::vector<png_bytep> rows(height);
  std::vector<uint16_t> mutable_samples;
  if (bit_depth == 16) {
    mutable_samples = samples;  // png_set_swap rewrites rows in place
    for (int y = 0; y < height; ++y)
      rows[y] = reinterpret_cast<png_bytep>(mutable_samples.data() + static_cast<size_t>(y) * stride);
  } else {
    row8.resize(static_cast<size_t>(height) * stride);
    for (size_t i = 0; i < row8.size(); ++i) row8[i] = static_cast<uint8_t>(samples[i]);
    for (int y = 0; y < height; ++y) rows[y] = row8.data() + static_cast<size_t>(y) * stride;
  }
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

}  // namespace

LoadedImage load_image_png(const std::string& path, bool linearize) {
  std::vector<uint16_t> samples;
  int w = 0, h = 0, c = 0, depth = 0;
  read_png_samples(path, samples, &w, &h, &c, &depth);

  LoadedImage out;
  out.bit_depth = depth;
  out.image = Image(w, h, c);
  const double maxval = depth == 16 ? 65535.0 : 255.0;
  for (int ch = 0; ch < c; ++ch) {
    Grid& g = out.image.channels[ch];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double v = samples[(static_cast<size_t>(y) * w + x) * c + ch] / maxval;
        if (linearize) v = srgb_to_linear(v);
        g.at(x, y) = v;
      }
  }
  return out;
}

void save_image_png(const std::string& path, const Image& img, int bit_depth, bool encode) {
  if (bit_depth != 8 && bit_depth != 16)
    throw InvalidConfig("save_image_png: bit depth must be 8 or 16");
  if (img.channel_count() != 1 && img.channel_count() != 3)
    throw InvalidInput("save_image_png: channel count must be 1 or 3");
  const int c = img.channel_count();
  const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<uint16_t> samples(static_cast<size_t>(img.width) * img.height * c);
  for (int ch = 0; ch < c; ++ch) {
    const Grid& g = img.channels[ch];
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double v = std::clamp(g.at(x, y), 0.0, 1.0);
        if (encode) v = linear_to_srgb(v);
        samples[(static_cast<size_t>(y) * img.width + x) * c + ch] =
            static_cast<uint16_t>(std::lround(v * maxval));
      }
  }
  write_png_samples(path, samples, img.width, img.height, c, bit_depth);
}

void save_gray8_png(const std::string& path, const std::vector<uint8_t>& codes, int width,
                    int height) {
  if (codes.size() != static_cast<size_t>(width) * height)
    throw InvalidInput("save_gray8_png: size mismatch");
  std::vector<uint16_t> samples(codes.begin(), codes.end());
  write_png_samples(path, samples, width, height, 1, 8);
}

std::vector<uint8_t> load_gray8_png(const std::string& path, int* width, int* height) {
  std::vector<uint16_t> samples;
  int c = 0, depth = 0;
  read_png_samples(path, samples, width, height, &c, &depth);
  if (c != 1 || depth != 8) throw FormatError("expected 8-bit grayscale PNG: " + path);
  return std::vector<uint8_t>(samples.begin(), samples.end());
}

void save_raw_f32(const std::string& path, const Image& img) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw FormatError("cannot create float dump: " + path);
  std::fprintf(f.get(), "f32 width=%d height=%d channels=%d order=planar-row-major\n",
               img.width, img.height, img.channel_count());
  std::vector<float> buf(static_cast<size_t>(img.width) * img.height);
  for (const Grid& g : img.channels) {
    for (size_t i = 0; i < g.size(); ++i) buf[i] = static_cast<float>(g.data[i]);
    if (std::fwrite(buf.data(), sizeof(float), buf.size(), f.get()) != buf.size())
      throw FormatError("short write on float dump: " + path);
  }
}

Image load_raw_f32(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw FormatError("cannot open float dump: " + path);
  char header[128];
  if (!std::fgets(header, sizeof(header), f.get()))
    throw FormatError("missing float dump header: " + path);
  int w = 0, h = 0, c = 0;
  if (std::sscanf(header, "f32 width=%d height=%d channels=%d", &w, &h, &c) != 3 || w < 1 ||
      h < 1 || (c != 1 && c != 3))
    throw FormatError("bad float dump header: " + path);
  Image img(w, h, c);
  std::vector<float> buf(static_cast<size_t>(w) * h);
  for (Grid& g : img.channels) {
    if (std::fread(buf.data(), sizeof(float), buf.size(), f.get()) != buf.size())
      throw FormatError("truncated float dump: " + path);
    for (size_t i = 0; i < g.size(); ++i) g.data[i] = buf[i];
  }
  return img;
}

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t * t * t);
}

}  // namespace

Image resize_bicubic(const Image& img, int width, int height) {
  if (width < 1 || height < 1) throw InvalidConfig("resize: target dims must be >= 1");
  Image out(width, height, img.channel_count());
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (int c = 0; c < img.channel_count(); ++c) {
    const Grid& src = img.channels[c];
    Grid& dst = out.channels[c];
    auto sample = [&](int x, int y) {
      x = std::clamp(x, 0, img.width - 1);
      y = std::clamp(y, 0, img.height - 1);
      return src.at(x, y);
    };
    for (int y = 0; y < height; ++y) {
      const double v = (y + 0.5) * sy - 0.5;
      const int y1 = static_cast<int>(std::floor(v));
      const double ty = v - y1;
      for (int x = 0; x < width; ++x) {
        const double u = (x + 0.5) * sx - 0.5;
        const int x1 = static_cast<int>(std::floor(u));
        const double tx = u - x1;
        double col[4];
        for (int k = -1; k <= 2; ++k)
          col[k + 1] = catmull_rom(sample(x1 - 1, y1 + k), sample(x1, y1 + k),
                                   sample(x1 + 1, y1 + k), sample(x1 + 2, y1 + k), tx);
        dst.at(x, y) = std::clamp(catmull_rom(col[0], col[1], col[2], col[3], ty), 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace fovholo
