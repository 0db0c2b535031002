#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "fovholo/autodiff.hpp"
#include "fovholo/grid.hpp"

namespace fovholo {

/// Fixation point, viewing geometry and pooling parameters.
struct GazeContext {
  double gaze_x = 0.5;  // normalized [0,1]
  double gaze_y = 0.5;
  double pixels_per_degree = 109.7;
  double alpha = 0.05;  // pooling diameter (deg) per squared degree of eccentricity
  double fovea_threshold_px = 1.0;
  /// Optional linear foveal-to-peripheral transition band (degrees) applied
  /// to the loss weighting; 0 keeps the hard threshold.
  double foveal_blend_deg = 0.0;
};

void validate_gaze(const GazeContext& ctx);

/// 5-tap halfband-style lowpass for the pyramid's scale recursion; flat
/// passband so the detail bands carry little low-frequency residue.
/// Separable, so the effective 2D kernel is 5x5.
inline constexpr std::array<double, 5> kLowpass5 = {-1.0 / 16, 4.0 / 16, 10.0 / 16, 4.0 / 16,
                                                    -1.0 / 16};
/// Interpolation taps for zero-inserted upsampling (2x the lowpass per axis;
/// even and odd taps each sum to 1, so constants survive upsampling exactly).
inline constexpr std::array<double, 5> kUpsample5 = {-1.0 / 8, 4.0 / 8, 10.0 / 8, 4.0 / 8,
                                                     -1.0 / 8};
/// 5-tap binomial used to split a detail band by orientation; strong
/// attenuation at the band's center frequency.
inline constexpr std::array<double, 5> kSplit5 = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16,
                                                  1.0 / 16};

/// Two-orientation pyramid: full-res highpass residual, per-level horizontal
/// (structures varying along y) and vertical (varying along x) bands at
/// dyadically shrinking resolution, and a lowpass residual at the coarsest
/// scale. Synthesis is exact by construction.
struct Pyramid {
  struct Level {
    Grid horizontal;
    Grid vertical;
  };
  int base_width = 0;
  int base_height = 0;
  Grid highpass;              // scale 0
  std::vector<Level> levels;  // level i at scale i
  Grid lowpass;               // scale level_count
};

/// Levels until the band min dimension would drop below 16, capped at 5.
int default_level_count(int width, int height);

Pyramid build_steerable_pyramid(const Grid& channel, int level_count);
Grid reconstruct_from_pyramid(const Pyramid& p);

/// Ordered MIP chain; level 0 is the source, each next level the 2x2 average
/// (edge replication for odd sizes), down to 1x1.
struct Mipmap {
  std::vector<Grid> levels;
};

Mipmap make_mipmap(const Grid& band);
int mip_level_count(int width, int height);

/// Fractional MIP level per pixel.
struct LodMap {
  Grid data;
};

/// Flat-screen small-angle eccentricity in degrees; pixel coordinates are
/// integers, the gaze point lives at (gaze_x*width, gaze_y*height).
double eccentricity(double px, double py, const GazeContext& ctx, int width, int height);

/// Pooling diameter in base-image pixels at the given eccentricity.
double pooling_size_px(double ecc_deg, const GazeContext& ctx);

LodMap make_lod_map(int width, int height, const GazeContext& ctx);

/// Trilinear MIP sampling of the band at the per-pixel fractional level.
Grid pool(const Grid& band, const LodMap& lod);

/// Full-range BT.601 YCbCr (Cb/Cr offset +0.5). Single-channel passthrough.
Image rgb_to_ycbcr(const Image& img);
Image ycbcr_to_rgb(const Image& img);

/// Perceptual features: pooled (mean, std) per pyramid band per channel, in
/// deterministic order, plus the foveal mask and raw pixels under it.
struct FeatureSet {
  struct Entry {
    Grid mean;
    Grid stdev;
    int channel = 0;  // perceptual channel (Y/Cb/Cr or gray)
    int scale = 0;    // pyramid scale of the band
  };
  std::vector<Entry> entries;
  Grid foveal_mask;     // base dims; 1 inside the fovea
  Image foveal_pixels;  // raw input image (masked use downstream)
};

inline constexpr double kStdEpsilon = 1e-8;

FeatureSet percept(const Image& img, const GazeContext& ctx, int level_count = 0);

/// Per-channel uniform [0,1] noise, deterministic in the seed.
Image uniform_noise_image(int width, int height, int channels, uint64_t seed);

/// Noise image whose pooled band statistics are matched to the target's;
/// foveal pixels copied from the target; clamped to [0,1].
Image synthesize_metamer(const Image& target, const GazeContext& ctx, uint64_t seed);

// ---------------------------------------------------------------------------
// Differentiable path. A PerceptPlan fixes everything that depends only on
// geometry and gaze (LoD maps, gather plans, masks) so an optimization run
// pays for it once.

struct ScalePlan {
  int width = 0;
  int height = 0;
  ad::GatherPlan gather;
  Grid lod;
  Grid nonfoveal_mask;  // loss weight outside the fovea (1 - foveal ramp)
  double nonfoveal_count = 0;
};

struct PerceptPlan {
  int width = 0;
  int height = 0;
  int channels = 0;
  int level_count = 0;
  GazeContext ctx;
  std::vector<ScalePlan> scales;  // index = pyramid scale, size level_count+1
  Grid foveal_mask;               // base dims; hard boolean mask, 1 inside
  Grid foveal_weight;             // base dims; ramp when foveal_blend_deg > 0
  double foveal_count = 0;        // sum of foveal_weight

  static std::shared_ptr<const PerceptPlan> build(int width, int height, int channels,
                                                  const GazeContext& ctx, int level_count = 0);
};

/// Geometry-only plan for acuity blur (scale-0 pooling of a raw image).
ScalePlan build_scale_plan(int width, int height, const GazeContext& ctx, int scale);

struct FeatureVars {
  struct Entry {
    ad::Var mean;
    ad::Var stdev;
    int channel = 0;
    int scale = 0;
  };
  std::vector<Entry> entries;
  std::vector<ad::Var> raw_channels;  // pre-colour-transform inputs
};

/// Builds the percept of `channels` on the tape (YCbCr applied when 3).
FeatureVars percept_nodes(ad::Tape& tape, const std::vector<ad::Var>& channels,
                          const PerceptPlan& plan);

/// Pools one grid var through its mipmap with the given scale plan.
ad::Var pool_nodes(ad::Tape& tape, ad::Var band, const ScalePlan& plan);

}  // namespace fovholo
