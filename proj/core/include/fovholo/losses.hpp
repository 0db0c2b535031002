#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "fovholo/autodiff.hpp"
#include "fovholo/grid.hpp"
#include "fovholo/perception.hpp"

namespace fovholo {

enum class FeatureNorm { L1, L2 };

enum class LossKind { metameric, mse, blur_match, blur_lowpass, metamer_target };

const char* loss_kind_name(LossKind kind);
LossKind loss_kind_from_name(std::string_view name);

struct LossConfig {
  FeatureNorm feature_norm = FeatureNorm::L2;
  std::array<double, 3> channel_weights = {1.0, 0.25, 0.25};  // Y, Cb, Cr
  double foveal_weight = 1.0;
  int level_count = 0;  // 0 = derive from image size
};

void validate_loss_config(const LossConfig& cfg);

/// Feature-space distance between the two images' percepts (channel-weighted,
/// averaged per feature map, outside the fovea) plus foveal_weight times the
/// mean squared pixel difference inside the fovea.
double metameric_loss(const Image& A, const Image& B, const GazeContext& ctx,
                      const LossConfig& cfg = {});

double mse_loss(const Image& A, const Image& B);

/// Spatially varying lowpass with the percept module's pooling sizes
/// (mipmap + trilinear sampling); identity at the gaze point.
Image acuity_blur(const Image& img, const GazeContext& ctx);

double blur_match_loss(const Image& I, const Image& T, const GazeContext& ctx);
double blur_lowpass_loss(const Image& I, const Image& T, const GazeContext& ctx);
double metamer_target_loss(const Image& I, const Image& T, const GazeContext& ctx,
                           uint64_t seed);

/// MSE restricted to pixels where mask != 0 (averaged over those pixels and
/// all channels); 0 when the mask is empty.
double masked_mse(const Image& A, const Image& B, const Grid& mask);

/// Differentiable objective in its image argument. Everything derived from
/// the fixed target — its percept, its acuity blur, its metamer — is computed
/// once at construction and reused, so the per-evaluation tape contains only
/// the candidate image's side of the loss.
class ImageLoss {
 public:
  ImageLoss(LossKind kind, const Image& target, const GazeContext& ctx,
            const LossConfig& cfg = {}, uint64_t metamer_seed = 1);

  /// Adds the loss of the image given by `image_channels` to the tape.
  /// The ImageLoss must outlive any tape it builds on.
  ad::Var build(ad::Tape& tape, const std::vector<ad::Var>& image_channels) const;

  double value(const Image& A) const;
  double value_and_gradient(const Image& A, Image* gradient) const;

  LossKind kind() const { return kind_; }
  const Image& target() const { return target_; }
  const PerceptPlan& percept_plan() const;

 private:
  LossKind kind_;
  LossConfig cfg_;
  GazeContext ctx_;
  Image target_;
  std::shared_ptr<const PerceptPlan> plan_;  // metameric
  FeatureSet target_features_;               // metameric
  std::shared_ptr<ScalePlan> blur_plan_;     // blur_lowpass
  Image blurred_target_;                     // blur losses
  Image metamer_;                            // metamer_target
};

}  // namespace fovholo
