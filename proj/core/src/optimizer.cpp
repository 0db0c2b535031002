#include "fovholo/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fovholo/errors.hpp"

namespace fovholo {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void validate_optim_config(const OptimConfig& cfg) {
  if (cfg.steps < 1) throw InvalidConfig("optim: steps must be >= 1");
  if (cfg.learning_rate <= 0.0) throw InvalidConfig("optim: learning_rate must be > 0");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0)
    throw InvalidConfig("optim: beta1/beta2 must lie in [0, 1)");
  if (cfg.eps <= 0.0) throw InvalidConfig("optim: eps must be > 0");
  if (cfg.warm_steps < 1) throw InvalidConfig("optim: warm_steps must be >= 1");
  if (cfg.warm_lr_scale <= 0.0) throw InvalidConfig("optim: warm_lr_scale must be > 0");
}

void adam_step(PhaseMap& phase, const std::vector<Grid>& gradient, AdamState& state,
               const OptimConfig& cfg) {
  if (static_cast<int>(gradient.size()) != phase.channel_count())
    throw InvalidInput("adam_step: gradient channel count mismatch");
  if (state.first_moment.empty()) {
    state.first_moment.assign(phase.channel_count(), Grid(phase.width, phase.height, 0.0));
    state.second_moment.assign(phase.channel_count(), Grid(phase.width, phase.height, 0.0));
    state.step_count = 0;
  }
  for (int c = 0; c < phase.channel_count(); ++c)
    if (!gradient[c].same_shape(phase.channels[c]))
      throw InvalidInput("adam_step: gradient shape mismatch");
  for (const Grid& g : gradient)
    if (!grid_all_finite(g)) throw Diverged("adam_step: non-finite gradient",
                                            static_cast<int>(state.step_count));

  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));
  for (int c = 0; c < phase.channel_count(); ++c) {
    Grid& m = state.first_moment[c];
    Grid& v = state.second_moment[c];
    Grid& p = phase.channels[c];
    const Grid& g = gradient[c];
    for (size_t i = 0; i < p.size(); ++i) {
      m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g.data[i];
      v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g.data[i] * g.data[i];
      const double mh = m.data[i] / bc1;
      const double vh = v.data[i] / bc2;
      p.data[i] = wrap_phase(p.data[i] - cfg.learning_rate * mh / (std::sqrt(vh) + cfg.eps));
    }
  }
}

PhaseMap random_phase(int width, int height, int channels, double pitch_m, uint64_t seed) {
  PhaseMap p(width, height, channels, pitch_m);
  std::mt19937_64 rng(seed);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (Grid& c : p.channels)
    for (double& v : c.data) v = wrap_phase(uniform01(rng) * kTwoPi);
  return p;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> unit_mean_scales(const Image& target) {
  std::vector<double> scales;
  for (const Grid& c : target.channels) {
    const double m = grid_mean(c);
    scales.push_back(m > 1e-9 ? 1.0 / m : 1.0);
  }
  return scales;
}

Image scale_image(const Image& img, const std::vector<double>& scales) {
  Image out = img;
  for (int c = 0; c < out.channel_count(); ++c)
    for (double& v : out.channels[c].data) v *= scales[c];
  return out;
}

// The internal comparison image lives in normalized units. For the
// metamer-target loss the metamer is synthesized from the original [0,1]
// target and scaled afterwards, since synthesis clamps to display range.
ImageLoss make_internal_loss(const Image& target, const std::vector<double>& scales,
                             const GazeContext& ctx, LossKind kind, const LossConfig& cfg,
                             uint64_t metamer_seed) {
  if (kind == LossKind::metamer_target) {
    Image metamer = synthesize_metamer(target, ctx, metamer_seed);
    return ImageLoss(LossKind::mse, scale_image(metamer, scales), ctx, cfg);
  }
  return ImageLoss(kind, scale_image(target, scales), ctx, cfg, metamer_seed);
}

}  // namespace

HologramObjective::HologramObjective(const Image& target, const GazeContext& ctx,
                                     const DisplayConfig& display, LossKind kind,
                                     const LossConfig& loss_cfg, uint64_t metamer_seed)
    : display_(display),
      width_(target.width),
      height_(target.height),
      channels_(target.channel_count()),
      target_scale_(unit_mean_scales(target)),
      loss_(make_internal_loss(target, target_scale_, ctx, kind, loss_cfg, metamer_seed)) {
  wavelengths_m_ = display.wavelengths_m.empty() ? default_wavelengths(channels_)
                                                 : display.wavelengths_m;
  if (static_cast<int>(wavelengths_m_.size()) != channels_)
    throw InvalidConfig("objective: channel/wavelength count mismatch");
  const int kw = display_.pad ? 2 * width_ : width_;
  const int kh = display_.pad ? 2 * height_ : height_;
  for (double lambda : wavelengths_m_)
    kernels_.push_back(
        fresnel_transfer(kw, kh, {display_.distance_m, lambda, display_.pitch_m}));
}

Image HologramObjective::reconstruct(const PhaseMap& phase) const {
  return reconstruct_intensity(phase, display_.distance_m, wavelengths_m_, display_.pad);
}

Image HologramObjective::reconstruct_display(const PhaseMap& phase) const {
  Image img = reconstruct(phase);
  for (int c = 0; c < img.channel_count(); ++c)
    for (double& v : img.channels[c].data) v /= target_scale_[c];
  return img;
}

double HologramObjective::loss(const PhaseMap& phase) const {
  return loss_.value(reconstruct(phase));
}

double HologramObjective::loss_and_gradient(const PhaseMap& phase,
                                            std::vector<Grid>* gradient) const {
  if (phase.width != width_ || phase.height != height_ ||
      phase.channel_count() != channels_)
    throw InvalidInput("objective: phase dimensions do not match target");

  ad::Tape t;
  std::vector<ad::Var> phase_vars;
  std::vector<ad::Var> intensity;
  for (int c = 0; c < channels_; ++c) {
    ad::Var p = t.input(phase.channels[c]);
    phase_vars.push_back(p);
    ad::CVar u0 = t.expj(p);
    if (display_.pad) u0 = t.cembed_center(u0, 2 * width_, 2 * height_);
    ad::CVar spectrum = t.fft2(u0);
    ad::CVar shaped = t.cmul_grid(spectrum, &kernels_[c].data);
    ad::CVar u = t.ifft2(shaped);
    if (display_.pad) u = t.ccrop_center(u, width_, height_);
    intensity.push_back(t.abs2(u));
  }
  ad::Var loss = loss_.build(t, intensity);
  if (gradient) {
    t.backward(loss);
    gradient->clear();
    for (int c = 0; c < channels_; ++c) gradient->push_back(t.grad(phase_vars[c]));
  }
  return t.scalar_value(loss);
}

// ---------------------------------------------------------------------------

namespace {

OptimizeResult run_loop(PhaseMap phase, const HologramObjective& objective,
                        const OptimConfig& cfg, const ProgressCallback& progress) {
  OptimizeResult result;
  result.target_scale = objective.target_scale();
  AdamState state;
  std::vector<Grid> grads;
  for (int i = 0; i < cfg.steps; ++i) {
    const double loss = objective.loss_and_gradient(phase, &grads);
    if (!std::isfinite(loss)) throw Diverged("optimise: non-finite loss", i);
    for (const Grid& g : grads)
      if (!grid_all_finite(g)) throw Diverged("optimise: non-finite gradient", i);
    result.history.push_back(loss);
    adam_step(phase, grads, state, cfg);
    if (progress) progress(i, loss);
  }
  result.phase = std::move(phase);
  return result;
}

}  // namespace

OptimizeResult optimise_hologram(const Image& target, const GazeContext& ctx,
                                 const DisplayConfig& display, const OptimConfig& cfg,
                                 const LossConfig& loss_cfg, const ProgressCallback& progress) {
  validate_image(target, "optimise target");
  validate_optim_config(cfg);
  HologramObjective objective(target, ctx, display, cfg.loss_kind, loss_cfg, cfg.seed);
  PhaseMap phase = random_phase(target.width, target.height, target.channel_count(),
                                display.pitch_m, cfg.seed);
  return run_loop(std::move(phase), objective, cfg, progress);
}

OptimizeResult warm_start_optimise(const PhaseMap& prev, const Image& target,
                                   const GazeContext& ctx, const DisplayConfig& display,
                                   const OptimConfig& cfg, const LossConfig& loss_cfg,
                                   const ProgressCallback& progress) {
  validate_image(target, "optimise target");
  validate_optim_config(cfg);
  if (prev.width != target.width || prev.height != target.height ||
      prev.channel_count() != target.channel_count())
    throw InvalidInput("warm_start: previous phase does not match target dimensions");
  HologramObjective objective(target, ctx, display, cfg.loss_kind, loss_cfg, cfg.seed);
  OptimConfig warm = cfg;
  warm.steps = cfg.warm_steps;
  warm.learning_rate = cfg.learning_rate * cfg.warm_lr_scale;
  PhaseMap phase = prev;
  phase.canonicalize();
  return run_loop(std::move(phase), objective, warm, progress);
}

TemporalResult temporal_sequence(const Image& target, const GazeContext& ctx,
                                 const DisplayConfig& display, const OptimConfig& cfg,
                                 const LossConfig& loss_cfg, int count,
                                 const ProgressCallback& progress) {
  if (count < 1) throw InvalidConfig("temporal_sequence: count must be >= 1");
  TemporalResult result;
  OptimizeResult first = optimise_hologram(target, ctx, display, cfg, loss_cfg, progress);
  result.phases.push_back(std::move(first.phase));
  result.target_scale = first.target_scale;

  HologramObjective objective(target, ctx, display, cfg.loss_kind, loss_cfg, cfg.seed);
  Image sum = objective.reconstruct_display(result.phases[0]);
  for (int k = 1; k < count; ++k) {
    OptimizeResult r = warm_start_optimise(result.phases.back(), target, ctx, display, cfg,
                                           loss_cfg, progress);
    result.phases.push_back(std::move(r.phase));
    Image recon = objective.reconstruct_display(result.phases.back());
    for (int c = 0; c < sum.channel_count(); ++c)
      for (size_t i = 0; i < sum.channels[c].size(); ++i)
        sum.channels[c].data[i] += recon.channels[c].data[i];
  }
  for (Grid& c : sum.channels)
    for (double& v : c.data) v /= count;
  result.average = std::move(sum);
  return result;
}

}  // namespace fovholo
