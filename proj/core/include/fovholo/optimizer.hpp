#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fovholo/grid.hpp"
#include "fovholo/losses.hpp"
#include "fovholo/propagation.hpp"

namespace fovholo {

struct OptimConfig {
  int steps = 200;
  double learning_rate = 0.1;  // radians per Adam unit step
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 1;
  LossKind loss_kind = LossKind::metameric;
  int warm_steps = 5;
  double warm_lr_scale = 0.2;
};

void validate_optim_config(const OptimConfig& cfg);

/// Display geometry: SLM pitch, per-channel laser lines, focal distance.
struct DisplayConfig {
  double pitch_m = kDefaultPitchM;
  double distance_m = kDefaultDistanceM;
  std::vector<double> wavelengths_m;  // empty = defaults for the channel count
  bool pad = false;                   // 2x zero-padded propagation
};

struct AdamState {
  std::vector<Grid> first_moment;
  std::vector<Grid> second_moment;
  long step_count = 0;
};

/// Bias-corrected Adam update on the phase (one moment pair per channel);
/// the result is re-canonicalized into [0, 2*pi).
void adam_step(PhaseMap& phase, const std::vector<Grid>& gradient, AdamState& state,
               const OptimConfig& cfg);

/// Uniform random phase in [0, 2*pi), deterministic in the seed.
PhaseMap random_phase(int width, int height, int channels, double pitch_m, uint64_t seed);

/// Scalar loss of the simulated reconstruction against a fixed target, with
/// its exact reverse-mode gradient with respect to every phase value.
///
/// A unit-amplitude phase hologram reconstructs with mean intensity exactly 1
/// (energy conservation), while display targets live in [0,1]; the absolute
/// brightness of a real display is a free per-channel laser-power scale. The
/// objective therefore normalizes each target channel to unit mean and
/// optimizes against that; reconstruct_display() maps a reconstruction back
/// into the target's original units.
class HologramObjective {
 public:
  HologramObjective(const Image& target, const GazeContext& ctx, const DisplayConfig& display,
                    LossKind kind, const LossConfig& loss_cfg = {}, uint64_t metamer_seed = 1);

  double loss(const PhaseMap& phase) const;
  double loss_and_gradient(const PhaseMap& phase, std::vector<Grid>* gradient) const;

  /// Raw simulated intensity (per-channel mean 1).
  Image reconstruct(const PhaseMap& phase) const;
  /// Simulated intensity in the target's units (divided by target_scale).
  Image reconstruct_display(const PhaseMap& phase) const;

  const std::vector<double>& wavelengths() const { return wavelengths_m_; }
  /// Per-channel factor s_c with internal_target_c = s_c * target_c.
  const std::vector<double>& target_scale() const { return target_scale_; }
  const ImageLoss& image_loss() const { return loss_; }

 private:
  DisplayConfig display_;
  std::vector<double> wavelengths_m_;
  std::vector<TransferKernel> kernels_;  // at (possibly padded) dims
  int width_ = 0, height_ = 0, channels_ = 0;
  std::vector<double> target_scale_;
  ImageLoss loss_;
};

using ProgressCallback = std::function<void(int iteration, double loss)>;

struct OptimizeResult {
  PhaseMap phase;
  std::vector<double> history;       // loss before each update
  std::vector<double> target_scale;  // per-channel normalization used
};

OptimizeResult optimise_hologram(const Image& target, const GazeContext& ctx,
                                 const DisplayConfig& display, const OptimConfig& cfg,
                                 const LossConfig& loss_cfg = {},
                                 const ProgressCallback& progress = nullptr);

/// As optimise_hologram but initialized from prev, running cfg.warm_steps
/// iterations at cfg.learning_rate * cfg.warm_lr_scale.
OptimizeResult warm_start_optimise(const PhaseMap& prev, const Image& target,
                                   const GazeContext& ctx, const DisplayConfig& display,
                                   const OptimConfig& cfg, const LossConfig& loss_cfg = {},
                                   const ProgressCallback& progress = nullptr);

struct TemporalResult {
  std::vector<PhaseMap> phases;
  Image average;  // mean of the simulated reconstructions, in target units
  std::vector<double> target_scale;
};

/// First hologram from random init, each subsequent one warm-started from the
/// previous phase; returns all phases plus the averaged reconstruction.
TemporalResult temporal_sequence(const Image& target, const GazeContext& ctx,
                                 const DisplayConfig& display, const OptimConfig& cfg,
                                 const LossConfig& loss_cfg = {}, int count = 5,
                                 const ProgressCallback& progress = nullptr);

}  // namespace fovholo
