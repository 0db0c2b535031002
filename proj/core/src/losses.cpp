#include "fovholo/losses.hpp"

#include <cmath>

#include "fovholo/errors.hpp"

namespace fovholo {

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::metameric: return "metameric";
    case LossKind::mse: return "mse";
    case LossKind::blur_match: return "blur_match";
    case LossKind::blur_lowpass: return "blur_lowpass";
    case LossKind::metamer_target: return "metamer_target";
  }
  return "unknown";
}

LossKind loss_kind_from_name(std::string_view name) {
  if (name == "metameric") return LossKind::metameric;
  if (name == "mse") return LossKind::mse;
  if (name == "blur_match") return LossKind::blur_match;
  if (name == "blur_lowpass") return LossKind::blur_lowpass;
  if (name == "metamer_target") return LossKind::metamer_target;
  throw InvalidConfig("unknown loss kind: " + std::string(name));
}

void validate_loss_config(const LossConfig& cfg) {
  for (double w : cfg.channel_weights)
    if (!std::isfinite(w) || w < 0.0) throw InvalidConfig("channel weights must be finite and >= 0");
  if (!std::isfinite(cfg.foveal_weight) || cfg.foveal_weight < 0.0)
    throw InvalidConfig("foveal_weight must be finite and >= 0");
}

double masked_mse(const Image& A, const Image& B, const Grid& mask) {
  if (!A.same_shape(B)) throw InvalidInput("masked_mse: image shape mismatch");
  if (mask.width != A.width || mask.height != A.height)
    throw InvalidInput("masked_mse: mask shape mismatch");
  double count = 0;
  for (double m : mask.data)
    if (m != 0.0) count += 1.0;
  if (count == 0.0) return 0.0;
  double s = 0.0;
  for (int c = 0; c < A.channel_count(); ++c) {
    const Grid& a = A.channels[c];
    const Grid& b = B.channels[c];
    for (size_t i = 0; i < a.size(); ++i) {
      if (mask.data[i] == 0.0) continue;
      const double d = a.data[i] - b.data[i];
      s += d * d;
    }
  }
  return s / (count * A.channel_count());
}

// ---------------------------------------------------------------------------

ImageLoss::ImageLoss(LossKind kind, const Image& target, const GazeContext& ctx,
                     const LossConfig& cfg, uint64_t metamer_seed)
    : kind_(kind), cfg_(cfg), ctx_(ctx), target_(target) {
  validate_image(target, "ImageLoss target");
  validate_gaze(ctx);
  validate_loss_config(cfg);
  switch (kind_) {
    case LossKind::metameric:
      plan_ = PerceptPlan::build(target.width, target.height, target.channel_count(), ctx,
                                 cfg.level_count);
      target_features_ = percept(target, ctx, plan_->level_count);
      break;
    case LossKind::mse:
      break;
    case LossKind::blur_match:
      blurred_target_ = acuity_blur(target, ctx);
      break;
    case LossKind::blur_lowpass:
      blur_plan_ = std::make_shared<ScalePlan>(
          build_scale_plan(target.width, target.height, ctx, 0));
      blurred_target_ = acuity_blur(target, ctx);
      break;
    case LossKind::metamer_target:
      metamer_ = synthesize_metamer(target, ctx, metamer_seed);
      break;
  }
}

const PerceptPlan& ImageLoss::percept_plan() const {
  if (!plan_) throw InvalidConfig("percept_plan: loss has no percept plan");
  return *plan_;
}

namespace {

// weighted mean of squared entries of (a - b_const); the mask weights each
// squared term linearly (it may be fractional inside a foveal blend band)
ad::Var mean_sq_diff(ad::Tape& t, ad::Var a, const Grid& b, const Grid* mask, double count) {
  ad::Var d = t.square(t.sub(a, t.constant(b)));
  if (mask) d = t.mul_grid(d, mask);
  return t.scale(t.sum(d), 1.0 / count);
}

ad::Var mean_abs_diff(ad::Tape& t, ad::Var a, const Grid& b, const Grid* mask, double count) {
  ad::Var d = t.abs_val(t.sub(a, t.constant(b)));
  if (mask) d = t.mul_grid(d, mask);
  return t.scale(t.sum(d), 1.0 / count);
}

}  // namespace

ad::Var ImageLoss::build(ad::Tape& t, const std::vector<ad::Var>& chans) const {
  if (static_cast<int>(chans.size()) != target_.channel_count())
    throw InvalidInput("loss: channel count mismatch with target");
  for (const ad::Var& c : chans) {
    const Grid& v = t.value(c);
    if (v.width != target_.width || v.height != target_.height)
      throw InvalidInput("loss: image dimension mismatch with target");
  }
  const double npx = static_cast<double>(target_.width) * target_.height;
  const int C = target_.channel_count();

  switch (kind_) {
    case LossKind::mse: {
      std::vector<ad::Var> terms;
      for (int c = 0; c < C; ++c)
        terms.push_back(mean_sq_diff(t, chans[c], target_.channels[c], nullptr, npx * C));
      return t.add_scalars(terms);
    }
    case LossKind::blur_match: {
      std::vector<ad::Var> terms;
      for (int c = 0; c < C; ++c)
        terms.push_back(mean_sq_diff(t, chans[c], blurred_target_.channels[c], nullptr, npx * C));
      return t.add_scalars(terms);
    }
    case LossKind::blur_lowpass: {
      std::vector<ad::Var> terms;
      for (int c = 0; c < C; ++c) {
        ad::Var blurred = pool_nodes(t, chans[c], *blur_plan_);
        terms.push_back(
            mean_sq_diff(t, blurred, blurred_target_.channels[c], nullptr, npx * C));
      }
      return t.add_scalars(terms);
    }
    case LossKind::metamer_target: {
      std::vector<ad::Var> terms;
      for (int c = 0; c < C; ++c)
        terms.push_back(mean_sq_diff(t, chans[c], metamer_.channels[c], nullptr, npx * C));
      return t.add_scalars(terms);
    }
    case LossKind::metameric: {
      FeatureVars fv = percept_nodes(t, chans, *plan_);
      const double n_maps = 2.0 * static_cast<double>(fv.entries.size());
      std::vector<ad::Var> terms;
      for (size_t e = 0; e < fv.entries.size(); ++e) {
        const auto& entry = fv.entries[e];
        const auto& tgt = target_features_.entries[e];
        const ScalePlan& sp = plan_->scales[entry.scale];
        if (sp.nonfoveal_count == 0.0) continue;
        const double w = (C == 3) ? cfg_.channel_weights[entry.channel] : 1.0;
        if (w == 0.0) continue;
        const double denom = sp.nonfoveal_count * n_maps;
        ad::Var tm, ts;
        if (cfg_.feature_norm == FeatureNorm::L2) {
          tm = mean_sq_diff(t, entry.mean, tgt.mean, &sp.nonfoveal_mask, denom);
          ts = mean_sq_diff(t, entry.stdev, tgt.stdev, &sp.nonfoveal_mask, denom);
        } else {
          tm = mean_abs_diff(t, entry.mean, tgt.mean, &sp.nonfoveal_mask, denom);
          ts = mean_abs_diff(t, entry.stdev, tgt.stdev, &sp.nonfoveal_mask, denom);
        }
        terms.push_back(t.scale(t.add_scalars({tm, ts}), w));
      }
      if (plan_->foveal_count > 0.0 && cfg_.foveal_weight > 0.0) {
        std::vector<ad::Var> fov;
        for (int c = 0; c < C; ++c)
          fov.push_back(mean_sq_diff(t, chans[c], target_.channels[c], &plan_->foveal_weight,
                                     plan_->foveal_count * C));
        terms.push_back(t.scale(t.add_scalars(fov), cfg_.foveal_weight));
      }
      if (terms.empty()) return t.constant_scalar(0.0);
      return t.add_scalars(terms);
    }
  }
  throw InvalidConfig("loss: unknown kind");
}

double ImageLoss::value(const Image& A) const {
  validate_image(A, "loss argument");
  ad::Tape t;
  std::vector<ad::Var> chans;
  for (const Grid& c : A.channels) chans.push_back(t.constant(c));
  return t.scalar_value(build(t, chans));
}

double ImageLoss::value_and_gradient(const Image& A, Image* gradient) const {
  validate_image(A, "loss argument");
  ad::Tape t;
  std::vector<ad::Var> chans;
  for (const Grid& c : A.channels) chans.push_back(t.input(c));
  ad::Var loss = build(t, chans);
  t.backward(loss);
  if (gradient) {
    *gradient = Image(A.width, A.height, A.channel_count());
    for (int c = 0; c < A.channel_count(); ++c) gradient->channels[c] = t.grad(chans[c]);
  }
  return t.scalar_value(loss);
}

// ---------------------------------------------------------------------------
// plain entry points

double metameric_loss(const Image& A, const Image& B, const GazeContext& ctx,
                      const LossConfig& cfg) {
  if (!A.same_shape(B)) throw InvalidInput("metameric_loss: dimension mismatch");
  return ImageLoss(LossKind::metameric, B, ctx, cfg).value(A);
}

double mse_loss(const Image& A, const Image& B) {
  if (!A.same_shape(B)) throw InvalidInput("mse_loss: dimension mismatch");
  return image_mse(A, B);
}

Image acuity_blur(const Image& img, const GazeContext& ctx) {
  validate_image(img, "acuity_blur");
  validate_gaze(ctx);
  LodMap lod = make_lod_map(img.width, img.height, ctx);
  Image out(img.width, img.height, img.channel_count());
  for (int c = 0; c < img.channel_count(); ++c) out.channels[c] = pool(img.channels[c], lod);
  return out;
}

double blur_match_loss(const Image& I, const Image& T, const GazeContext& ctx) {
  if (!I.same_shape(T)) throw InvalidInput("blur_match_loss: dimension mismatch");
  return mse_loss(I, acuity_blur(T, ctx));
}

double blur_lowpass_loss(const Image& I, const Image& T, const GazeContext& ctx) {
  if (!I.same_shape(T)) throw InvalidInput("blur_lowpass_loss: dimension mismatch");
  return mse_loss(acuity_blur(I, ctx), acuity_blur(T, ctx));
}

double metamer_target_loss(const Image& I, const Image& T, const GazeContext& ctx,
                           uint64_t seed) {
  if (!I.same_shape(T)) throw InvalidInput("metamer_target_loss: dimension mismatch");
  return mse_loss(I, synthesize_metamer(T, ctx, seed));
}

}  // namespace fovholo
