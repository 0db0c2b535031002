#include "fovholo/perception.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fovholo/errors.hpp"

namespace fovholo {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr double kYR = 0.299, kYG = 0.587, kYB = 0.114;

}  // namespace

void validate_gaze(const GazeContext& ctx) {
  if (ctx.gaze_x < 0.0 || ctx.gaze_x > 1.0 || ctx.gaze_y < 0.0 || ctx.gaze_y > 1.0)
    throw InvalidConfig("gaze must lie in [0,1]^2");
  if (ctx.pixels_per_degree <= 0.0) throw InvalidConfig("pixels_per_degree must be > 0");
  if (ctx.alpha < 0.0) throw InvalidConfig("alpha must be >= 0");
  if (ctx.fovea_threshold_px <= 0.0) throw InvalidConfig("fovea_threshold_px must be > 0");
  if (ctx.foveal_blend_deg < 0.0) throw InvalidConfig("foveal_blend_deg must be >= 0");
}

/// Loss weight of the foveal term at an eccentricity: 1 inside the fovea,
/// optional linear falloff over foveal_blend_deg, 0 beyond.
static double foveal_weight_at(double ecc_deg, const GazeContext& ctx) {
  if (pooling_size_px(ecc_deg, ctx) <= ctx.fovea_threshold_px) return 1.0;
  if (ctx.foveal_blend_deg <= 0.0 || ctx.alpha <= 0.0) return 0.0;
  const double e_f =
      std::sqrt(ctx.fovea_threshold_px / (ctx.alpha * ctx.pixels_per_degree));
  return std::clamp(1.0 - (ecc_deg - e_f) / ctx.foveal_blend_deg, 0.0, 1.0);
}

int default_level_count(int width, int height) {
  const int d = std::min(width, height);
  int levels = 0;
  while (levels < 5 && (d >> levels) >= 16) ++levels;
  return std::max(levels, 1);
}

// ---------------------------------------------------------------------------
// pyramid

namespace {

struct PyramidVars {
  ad::Var highpass;
  struct Level {
    ad::Var horizontal, vertical;
  };
  std::vector<Level> levels;
  ad::Var lowpass;
};

ad::Var blur5(ad::Tape& t, ad::Var a) {
  return t.conv_y(t.conv_x(a, kLowpass5), kLowpass5);
}

ad::Var upsample2(ad::Tape& t, ad::Var a, int tw, int th) {
  return t.conv_y(t.conv_x(t.zero_upsample(a, tw, th), kUpsample5), kUpsample5);
}

PyramidVars pyramid_nodes(ad::Tape& t, ad::Var channel, int level_count) {
  const Grid& cv = t.value(channel);
  if (level_count < 0) throw InvalidConfig("build_steerable_pyramid: negative level count");
  if (std::min(cv.width, cv.height) < (8 << level_count))
    throw InvalidConfig("build_steerable_pyramid: too many levels for the image size");

  PyramidVars p;
  ad::Var smooth = blur5(t, channel);
  p.highpass = t.sub(channel, smooth);

  ad::Var a = smooth;
  for (int i = 0; i < level_count; ++i) {
    // copy dims: value() references are invalidated by subsequent op nodes
    const int aw = t.value(a).width, ah = t.value(a).height;
    ad::Var next = t.downsample2(blur5(t, a));
    ad::Var up = upsample2(t, next, aw, ah);
    ad::Var detail = t.sub(a, up);
    // split the detail band by frequency content along x: the x-smooth part
    // of a bandpass annulus is the y-detail (horizontal structures)
    ad::Var horizontal = t.conv_x(detail, kSplit5);
    ad::Var vertical = t.sub(detail, horizontal);
    p.levels.push_back({horizontal, vertical});
    a = next;
  }
  p.lowpass = a;
  return p;
}

}  // namespace

Pyramid build_steerable_pyramid(const Grid& channel, int level_count) {
  if (channel.width < 1 || channel.height < 1)
    throw InvalidInput("build_steerable_pyramid: empty input");
  if (level_count == 0) level_count = default_level_count(channel.width, channel.height);
  ad::Tape t;
  PyramidVars pv = pyramid_nodes(t, t.constant(channel), level_count);
  Pyramid p;
  p.base_width = channel.width;
  p.base_height = channel.height;
  p.highpass = t.value(pv.highpass);
  for (const auto& lv : pv.levels)
    p.levels.push_back({t.value(lv.horizontal), t.value(lv.vertical)});
  p.lowpass = t.value(pv.lowpass);
  return p;
}

Grid reconstruct_from_pyramid(const Pyramid& p) {
  if (p.base_width < 1 || p.lowpass.data.empty() || p.highpass.data.empty())
    throw InvalidInput("reconstruct_from_pyramid: incomplete pyramid");
  for (const auto& lv : p.levels)
    if (lv.horizontal.data.empty() || lv.vertical.data.empty())
      throw InvalidInput("reconstruct_from_pyramid: missing band");

  ad::Tape t;
  ad::Var a = t.constant(p.lowpass);
  for (int i = static_cast<int>(p.levels.size()) - 1; i >= 0; --i) {
    ad::Var detail = t.add(t.constant(p.levels[i].horizontal), t.constant(p.levels[i].vertical));
    const int dw = t.value(detail).width, dh = t.value(detail).height;
    a = t.add(detail, upsample2(t, a, dw, dh));
  }
  ad::Var out = t.add(a, t.constant(p.highpass));
  const Grid& ov = t.value(out);
  if (ov.width != p.base_width || ov.height != p.base_height)
    throw InvalidInput("reconstruct_from_pyramid: inconsistent band dimensions");
  return ov;
}

// ---------------------------------------------------------------------------
// mipmaps and pooling

int mip_level_count(int width, int height) {
  int n = 1, w = width, h = height;
  while (w > 1 || h > 1) {
    w = (w + 1) / 2;
    h = (h + 1) / 2;
    ++n;
  }
  return n;
}

namespace {

std::vector<ad::Var> mipmap_nodes(ad::Tape& t, ad::Var band) {
  std::vector<ad::Var> levels{band};
  const Grid* cur = &t.value(band);
  while (cur->width > 1 || cur->height > 1) {
    ad::Var next = t.avgpool2(levels.back());
    levels.push_back(next);
    cur = &t.value(next);
  }
  return levels;
}

}  // namespace

Mipmap make_mipmap(const Grid& band) {
  if (band.width < 1 || band.height < 1) throw InvalidInput("make_mipmap: empty input");
  ad::Tape t;
  std::vector<ad::Var> vars = mipmap_nodes(t, t.constant(band));
  Mipmap m;
  for (ad::Var v : vars) m.levels.push_back(t.value(v));
  return m;
}

double eccentricity(double px, double py, const GazeContext& ctx, int width, int height) {
  const double gx = ctx.gaze_x * width;
  const double gy = ctx.gaze_y * height;
  return std::hypot(px - gx, py - gy) / ctx.pixels_per_degree;
}

double pooling_size_px(double ecc_deg, const GazeContext& ctx) {
  return std::max(1.0, ctx.alpha * ecc_deg * ecc_deg * ctx.pixels_per_degree);
}

namespace {

// LoD map for a band at pyramid scale `scale` with dimensions (w, h).
// Pixel (x, y) of the band sits at base coordinates (x*2^scale, y*2^scale);
// a pooling diameter of p base pixels spans p / 2^scale band pixels.
Grid lod_for_scale(int w, int h, const GazeContext& ctx, int scale, int base_w, int base_h) {
  Grid lod(w, h);
  const double step = static_cast<double>(1 << scale);
  const int n_mips = mip_level_count(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double e = eccentricity(x * step, y * step, ctx, base_w, base_h);
      const double p = pooling_size_px(e, ctx);
      double l = std::log2(p) - scale;
      l = std::clamp(l, 0.0, static_cast<double>(n_mips - 1));
      lod.at(x, y) = l;
    }
  }
  return lod;
}

ad::GatherPlan build_gather_plan(int w, int h, const Grid& lod) {
  const int n = mip_level_count(w, h);
  std::vector<std::pair<int, int>> dims;
  {
    int lw = w, lh = h;
    dims.emplace_back(lw, lh);
    while (lw > 1 || lh > 1) {
      lw = (lw + 1) / 2;
      lh = (lh + 1) / 2;
      dims.emplace_back(lw, lh);
    }
  }

  ad::GatherPlan plan;
  plan.out_width = w;
  plan.out_height = h;
  plan.taps_per_pixel = 8;
  const size_t npx = static_cast<size_t>(w) * h;
  plan.source.assign(npx * 8, 0);
  plan.index.assign(npx * 8, 0);
  plan.weight.assign(npx * 8, 0.0);

  auto emit_level = [&](size_t base, int slot, int level, int x, int y, double blend) {
    const int lw = dims[level].first, lh = dims[level].second;
    const double u = std::clamp((x + 0.5) * lw / static_cast<double>(w) - 0.5, 0.0,
                                static_cast<double>(lw - 1));
    const double v = std::clamp((y + 0.5) * lh / static_cast<double>(h) - 0.5, 0.0,
                                static_cast<double>(lh - 1));
    int x0 = static_cast<int>(std::floor(u));
    int y0 = static_cast<int>(std::floor(v));
    if (x0 >= lw - 1) x0 = lw - 1;
    if (y0 >= lh - 1) y0 = lh - 1;
    const int x1 = std::min(x0 + 1, lw - 1);
    const int y1 = std::min(y0 + 1, lh - 1);
    const double fx = u - x0;
    const double fy = v - y0;
    const double ws[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int xs[4] = {x0, x1, x0, x1};
    const int ys[4] = {y0, y0, y1, y1};
    for (int k = 0; k < 4; ++k) {
      plan.source[base + slot + k] = level;
      plan.index[base + slot + k] = ys[k] * lw + xs[k];
      plan.weight[base + slot + k] = blend * ws[k];
    }
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t base = (static_cast<size_t>(y) * w + x) * 8;
      const double l = std::clamp(lod.at(x, y), 0.0, static_cast<double>(n - 1));
      const int l0 = std::min(static_cast<int>(std::floor(l)), n - 1);
      const int l1 = std::min(l0 + 1, n - 1);
      const double tt = l - l0;
      emit_level(base, 0, l0, x, y, 1.0 - tt);
      emit_level(base, 4, l1, x, y, tt);
    }
  }
  return plan;
}

}  // namespace

LodMap make_lod_map(int width, int height, const GazeContext& ctx) {
  validate_gaze(ctx);
  return LodMap{lod_for_scale(width, height, ctx, 0, width, height)};
}

ad::Var pool_nodes(ad::Tape& t, ad::Var band, const ScalePlan& plan) {
  std::vector<ad::Var> mips = mipmap_nodes(t, band);
  return t.gather(mips, &plan.gather);
}

Grid pool(const Grid& band, const LodMap& lod) {
  if (!band.same_shape(lod.data)) throw InvalidInput("pool: lod/band dimension mismatch");
  ad::Tape t;
  ScalePlan plan;
  plan.width = band.width;
  plan.height = band.height;
  plan.gather = build_gather_plan(band.width, band.height, lod.data);
  return t.value(pool_nodes(t, t.constant(band), plan));
}

ScalePlan build_scale_plan(int width, int height, const GazeContext& ctx, int scale) {
  validate_gaze(ctx);
  ScalePlan sp;
  sp.width = width;
  sp.height = height;
  const int bw = width << scale, bh = height << scale;
  sp.lod = lod_for_scale(width, height, ctx, scale, bw, bh);
  sp.gather = build_gather_plan(width, height, sp.lod);
  sp.nonfoveal_mask = Grid(width, height, 0.0);
  const double step = static_cast<double>(1 << scale);
  double count = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double e = eccentricity(x * step, y * step, ctx, bw, bh);
      const double nf = 1.0 - foveal_weight_at(e, ctx);
      sp.nonfoveal_mask.at(x, y) = nf;
      count += nf;
    }
  sp.nonfoveal_count = count;
  return sp;
}

// ---------------------------------------------------------------------------
// colour

Image rgb_to_ycbcr(const Image& img) {
  if (img.channel_count() == 1) return img;
  if (img.channel_count() != 3) throw InvalidInput("rgb_to_ycbcr: expected 1 or 3 channels");
  Image out(img.width, img.height, 3);
  const Grid& r = img.channels[0];
  const Grid& g = img.channels[1];
  const Grid& b = img.channels[2];
  for (size_t i = 0; i < r.size(); ++i) {
    const double R = r.data[i], G = g.data[i], B = b.data[i];
    const double Y = kYR * R + kYG * G + kYB * B;
    out.channels[0].data[i] = Y;
    out.channels[1].data[i] = (B - Y) / 1.772 + 0.5;
    out.channels[2].data[i] = (R - Y) / 1.402 + 0.5;
  }
  return out;
}

Image ycbcr_to_rgb(const Image& img) {
  if (img.channel_count() == 1) return img;
  if (img.channel_count() != 3) throw InvalidInput("ycbcr_to_rgb: expected 1 or 3 channels");
  Image out(img.width, img.height, 3);
  for (size_t i = 0; i < img.channels[0].size(); ++i) {
    const double Y = img.channels[0].data[i];
    const double cb = img.channels[1].data[i] - 0.5;
    const double cr = img.channels[2].data[i] - 0.5;
    out.channels[0].data[i] = Y + 1.402 * cr;
    out.channels[1].data[i] = Y - (kYB * 1.772 / kYG) * cb - (kYR * 1.402 / kYG) * cr;
    out.channels[2].data[i] = Y + 1.772 * cb;
  }
  return out;
}

// ---------------------------------------------------------------------------
// percept

std::shared_ptr<const PerceptPlan> PerceptPlan::build(int width, int height, int channels,
                                                      const GazeContext& ctx, int level_count) {
  validate_gaze(ctx);
  if (level_count == 0) level_count = default_level_count(width, height);
  auto plan = std::make_shared<PerceptPlan>();
  plan->width = width;
  plan->height = height;
  plan->channels = channels;
  plan->level_count = level_count;
  plan->ctx = ctx;

  for (int s = 0; s <= level_count; ++s) {
    int w = width, h = height;
    for (int i = 0; i < s; ++i) {
      w = (w + 1) / 2;
      h = (h + 1) / 2;
    }
    ScalePlan sp;
    sp.width = w;
    sp.height = h;
    sp.lod = lod_for_scale(w, h, ctx, s, width, height);
    sp.gather = build_gather_plan(w, h, sp.lod);
    sp.nonfoveal_mask = Grid(w, h, 0.0);
    const double step = static_cast<double>(1 << s);
    double count = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double e = eccentricity(x * step, y * step, ctx, width, height);
        const double nf = 1.0 - foveal_weight_at(e, ctx);
        sp.nonfoveal_mask.at(x, y) = nf;
        count += nf;
      }
    sp.nonfoveal_count = count;
    plan->scales.push_back(std::move(sp));
  }

  plan->foveal_mask = Grid(width, height, 0.0);
  plan->foveal_weight = Grid(width, height, 0.0);
  double fcount = 0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double e = eccentricity(x, y, ctx, width, height);
      if (pooling_size_px(e, ctx) <= ctx.fovea_threshold_px) plan->foveal_mask.at(x, y) = 1.0;
      const double w_f = foveal_weight_at(e, ctx);
      plan->foveal_weight.at(x, y) = w_f;
      fcount += w_f;
    }
  plan->foveal_count = fcount;
  return plan;
}

FeatureVars percept_nodes(ad::Tape& t, const std::vector<ad::Var>& channels,
                          const PerceptPlan& plan) {
  if (static_cast<int>(channels.size()) != plan.channels)
    throw InvalidInput("percept_nodes: channel count mismatch with plan");

  FeatureVars out;
  out.raw_channels = channels;

  std::vector<ad::Var> perceptual;
  if (channels.size() == 3) {
    // full-range BT.601
    ad::Var Y = t.lincomb({channels[0], channels[1], channels[2]}, {kYR, kYG, kYB}, 0.0);
    ad::Var Cb = t.lincomb({channels[0], channels[1], channels[2]},
                           {-kYR / 1.772, -kYG / 1.772, (1.0 - kYB) / 1.772}, 0.5);
    ad::Var Cr = t.lincomb({channels[0], channels[1], channels[2]},
                           {(1.0 - kYR) / 1.402, -kYG / 1.402, -kYB / 1.402}, 0.5);
    perceptual = {Y, Cb, Cr};
  } else {
    perceptual = channels;
  }

  for (size_t c = 0; c < perceptual.size(); ++c) {
    PyramidVars pyr = pyramid_nodes(t, perceptual[c], plan.level_count);
    std::vector<std::pair<ad::Var, int>> bands;
    bands.emplace_back(pyr.highpass, 0);
    for (int i = 0; i < plan.level_count; ++i) {
      bands.emplace_back(pyr.levels[i].horizontal, i);
      bands.emplace_back(pyr.levels[i].vertical, i);
    }
    bands.emplace_back(pyr.lowpass, plan.level_count);

    for (auto& [band, scale] : bands) {
      const ScalePlan& sp = plan.scales[scale];
      ad::Var mean = pool_nodes(t, band, sp);
      ad::Var sq_mean = pool_nodes(t, t.square(band), sp);
      ad::Var variance = t.sub(sq_mean, t.square(mean));
      ad::Var stdev = t.sqrt_shift(variance, kStdEpsilon);
      out.entries.push_back({mean, stdev, static_cast<int>(c), scale});
    }
  }
  return out;
}

FeatureSet percept(const Image& img, const GazeContext& ctx, int level_count) {
  validate_image(img, "percept");
  auto plan = PerceptPlan::build(img.width, img.height, img.channel_count(), ctx, level_count);
  ad::Tape t;
  std::vector<ad::Var> channels;
  for (const Grid& c : img.channels) channels.push_back(t.constant(c));
  FeatureVars fv = percept_nodes(t, channels, *plan);
  FeatureSet fs;
  for (const auto& e : fv.entries)
    fs.entries.push_back({t.value(e.mean), t.value(e.stdev), e.channel, e.scale});
  fs.foveal_mask = plan->foveal_mask;
  fs.foveal_pixels = img;
  return fs;
}

// ---------------------------------------------------------------------------
// metamer synthesis

Image uniform_noise_image(int width, int height, int channels, uint64_t seed) {
  Image noise(width, height, channels);
  std::mt19937_64 rng(seed);
  for (Grid& c : noise.channels)
    for (double& v : c.data) v = uniform01(rng);
  return noise;
}

Image synthesize_metamer(const Image& target, const GazeContext& ctx, uint64_t seed) {
  validate_image(target, "synthesize_metamer");
  validate_gaze(ctx);
  const int level_count = default_level_count(target.width, target.height);
  auto plan = PerceptPlan::build(target.width, target.height, target.channel_count(), ctx,
                                 level_count);

  Image noise = uniform_noise_image(target.width, target.height, target.channel_count(), seed);

  const bool colour = target.channel_count() == 3;
  const Image target_p = colour ? rgb_to_ycbcr(target) : target;
  const Image noise_p = colour ? rgb_to_ycbcr(noise) : noise;

  const double kDiv = 1e-6;
  Image synth_p(target.width, target.height, target.channel_count());

  for (int c = 0; c < target.channel_count(); ++c) {
    Pyramid pt = build_steerable_pyramid(target_p.channels[c], level_count);
    Pyramid pn = build_steerable_pyramid(noise_p.channels[c], level_count);

    auto match_band = [&](const Grid& bn, const Grid& bt, int scale) -> Grid {
      const ScalePlan& sp = plan->scales[scale];
      LodMap lod{sp.lod};
      Grid mn = pool(bn, lod);
      Grid mt = pool(bt, lod);
      Grid sq_n(bn.width, bn.height), sq_t(bt.width, bt.height);
      for (size_t i = 0; i < sq_n.size(); ++i) sq_n.data[i] = bn.data[i] * bn.data[i];
      for (size_t i = 0; i < sq_t.size(); ++i) sq_t.data[i] = bt.data[i] * bt.data[i];
      Grid vn = pool(sq_n, lod);
      Grid vt = pool(sq_t, lod);
      Grid out(bn.width, bn.height);
      const double base = std::sqrt(kStdEpsilon);
      for (size_t i = 0; i < out.size(); ++i) {
        const double var_n = std::max(vn.data[i] - mn.data[i] * mn.data[i], 0.0);
        const double var_t = std::max(vt.data[i] - mt.data[i] * mt.data[i], 0.0);
        const double sn = std::sqrt(var_n + kStdEpsilon) - base;
        const double st = std::sqrt(var_t + kStdEpsilon) - base;
        out.data[i] = (bn.data[i] - mn.data[i]) * (st / (sn + kDiv)) + mt.data[i];
      }
      return out;
    };

    Pyramid matched;
    matched.base_width = target.width;
    matched.base_height = target.height;
    matched.highpass = match_band(pn.highpass, pt.highpass, 0);
    for (int i = 0; i < level_count; ++i)
      matched.levels.push_back({match_band(pn.levels[i].horizontal, pt.levels[i].horizontal, i),
                                match_band(pn.levels[i].vertical, pt.levels[i].vertical, i)});
    matched.lowpass = match_band(pn.lowpass, pt.lowpass, level_count);

    synth_p.channels[c] = reconstruct_from_pyramid(matched);
  }

  Image out = colour ? ycbcr_to_rgb(synth_p) : synth_p;
  for (int c = 0; c < out.channel_count(); ++c) {
    Grid& oc = out.channels[c];
    const Grid& tc = target.channels[c];
    for (size_t i = 0; i < oc.size(); ++i) {
      if (plan->foveal_mask.data[i] != 0.0) oc.data[i] = tc.data[i];
      oc.data[i] = std::clamp(oc.data[i], 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace fovholo
