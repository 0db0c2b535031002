#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fovholo/errors.hpp"
#include "fovholo/optimizer.hpp"
#include "fovholo/slm.hpp"
#include "support/checks.hpp"
#include "support/corpus.hpp"

using namespace fovholo;
using namespace fovholo::testsupport;

namespace {

GazeContext test_ctx() {
  GazeContext ctx;
  ctx.pixels_per_degree = 16.0;
  ctx.alpha = 0.05;
  return ctx;
}

bool phases_identical(const PhaseMap& a, const PhaseMap& b) {
  if (a.channel_count() != b.channel_count()) return false;
  for (int c = 0; c < a.channel_count(); ++c)
    if (a.channels[c].data != b.channels[c].data) return false;
  return true;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("adam_step") {
  OptimConfig cfg;
  cfg.learning_rate = 0.1;

  SUBCASE("zero gradient leaves the phase unchanged") {
    PhaseMap p(8, 8, 1, 8e-6);
    for (double& v : p.channels[0].data) v = 1.0;
    PhaseMap before = p;
    AdamState st;
    for (int i = 0; i < 3; ++i) adam_step(p, {Grid(8, 8, 0.0)}, st, cfg);
    CHECK(phases_identical(p, before));
  }

  SUBCASE("first step moves by about lr in the negative gradient direction") {
    PhaseMap p(4, 4, 1, 8e-6);
    for (double& v : p.channels[0].data) v = 3.0;
    AdamState st;
    adam_step(p, {Grid(4, 4, 0.5)}, st, cfg);
    for (double v : p.channels[0].data)
      CHECK(v == doctest::Approx(3.0 - cfg.learning_rate).epsilon(1e-6));
  }

  SUBCASE("constant gradient descends monotonically") {
    PhaseMap p(4, 4, 1, 8e-6);
    for (double& v : p.channels[0].data) v = 3.0;
    AdamState st;
    double prev = 3.0;
    for (int i = 0; i < 5; ++i) {
      adam_step(p, {Grid(4, 4, 1.0)}, st, cfg);
      CHECK(p.channels[0].at(0, 0) < prev);
      prev = p.channels[0].at(0, 0);
    }
  }

  SUBCASE("result is canonical") {
    PhaseMap p(2, 2, 1, 8e-6);
    for (double& v : p.channels[0].data) v = 0.01;
    AdamState st;
    adam_step(p, {Grid(2, 2, 1.0)}, st, cfg);  // would go negative without wrapping
    for (double v : p.channels[0].data) {
      CHECK(v >= 0.0);
      CHECK(v < 2.0 * std::numbers::pi);
    }
  }

  SUBCASE("non-finite gradient raises Diverged") {
    PhaseMap p(2, 2, 1, 8e-6);
    AdamState st;
    Grid g(2, 2, 0.0);
    g.at(0, 0) = std::nan("");
    CHECK_THROWS_AS(adam_step(p, {g}, st, cfg), Diverged);
  }
}

TEST_CASE("config validation") {
  OptimConfig cfg;
  cfg.steps = 0;
  CHECK_THROWS_AS(validate_optim_config(cfg), InvalidConfig);
  cfg = {};
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(validate_optim_config(cfg), InvalidConfig);
  cfg = {};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(validate_optim_config(cfg), InvalidConfig);

  Image target = corpus_image(0, 32, 1);
  OptimConfig zero;
  zero.steps = 0;
  CHECK_THROWS_AS(optimise_hologram(target, test_ctx(), DisplayConfig{}, zero), InvalidConfig);
  OptimConfig warm;
  warm.warm_steps = 0;
  PhaseMap prev = random_phase(32, 32, 1, 8e-6, 1);
  CHECK_THROWS_AS(warm_start_optimise(prev, target, test_ctx(), DisplayConfig{}, warm),
                  InvalidConfig);
}

TEST_CASE("gradient is zero at a perfect-match minimum") {
  // target := the reconstruction of a fixed phase, mse loss; at that phase
  // the loss and its gradient vanish
  PhaseMap fixed = random_phase(24, 24, 1, 8e-6, 5);
  DisplayConfig disp;
  Image target = reconstruct_intensity(fixed, disp.distance_m, {520e-9});
  HologramObjective obj(target, test_ctx(), disp, LossKind::mse);
  std::vector<Grid> grads;
  const double loss = obj.loss_and_gradient(fixed, &grads);
  CHECK(loss < 1e-20);
  for (double v : grads[0].data) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("global phase direction has zero directional derivative") {
  Image target = corpus_image(1, 24, 1);
  HologramObjective obj(target, test_ctx(), DisplayConfig{}, LossKind::mse);
  PhaseMap p = random_phase(24, 24, 1, 8e-6, 9);
  std::vector<Grid> grads;
  obj.loss_and_gradient(p, &grads);
  double directional = 0.0, norm1 = 0.0;
  for (double v : grads[0].data) {
    directional += v;
    norm1 += std::fabs(v);
  }
  CHECK(std::fabs(directional) < 1e-9 * std::max(norm1, 1.0));
}

TEST_CASE("phase gradient of the metameric loss matches finite differences") {
  GazeContext ctx = test_ctx();
  Image target = corpus_image(0, 32, 1);
  DisplayConfig disp;
  HologramObjective obj(target, ctx, disp, LossKind::metameric);
  PhaseMap p = random_phase(32, 32, 1, 8e-6, 21);
  std::vector<Grid> grads;
  obj.loss_and_gradient(p, &grads);

  auto eval = [&](const Grid& g) {
    PhaseMap q = p;
    q.channels[0] = g;
    return obj.loss(q);
  };
  GradCheck gc = check_gradient(grads[0], p.channels[0], eval, 1e-4, 1e-3, 1e-10);
  CHECK(gc.frac_within >= 0.95);
  CHECK(gc.worst <= 1e-2);
}

TEST_CASE("phase gradients check out for every loss kind") {
  GazeContext ctx = test_ctx();
  Image target = corpus_image(1, 24, 1);
  DisplayConfig disp;
  PhaseMap p = random_phase(24, 24, 1, 8e-6, 23);
  for (LossKind kind : {LossKind::metameric, LossKind::mse, LossKind::blur_match,
                        LossKind::blur_lowpass, LossKind::metamer_target}) {
    CAPTURE(loss_kind_name(kind));
    HologramObjective obj(target, ctx, disp, kind, {}, 3);
    std::vector<Grid> grads;
    obj.loss_and_gradient(p, &grads);
    auto eval = [&](const Grid& g) {
      PhaseMap q = p;
      q.channels[0] = g;
      return obj.loss(q);
    };
    GradCheck gc = check_gradient(grads[0], p.channels[0], eval, 1e-4, 1e-3, 1e-10);
    CHECK(gc.frac_within >= 0.95);
    CHECK(gc.worst <= 1e-2);
  }
}

TEST_CASE("optimise_hologram basics") {
  GazeContext ctx = test_ctx();
  Image target = corpus_image(2, 32, 1);

  SUBCASE("steps = 1 gives history of length 1") {
    OptimConfig cfg;
    cfg.steps = 1;
    cfg.loss_kind = LossKind::mse;
    OptimizeResult r = optimise_hologram(target, ctx, DisplayConfig{}, cfg);
    CHECK(r.history.size() == 1);
  }

  SUBCASE("seeded runs are bit-identical") {
    OptimConfig cfg;
    cfg.steps = 8;
    cfg.loss_kind = LossKind::metameric;
    cfg.seed = 1234;
    OptimizeResult a = optimise_hologram(target, ctx, DisplayConfig{}, cfg);
    OptimizeResult b = optimise_hologram(target, ctx, DisplayConfig{}, cfg);
    CHECK(phases_identical(a.phase, b.phase));
    CHECK(a.history == b.history);
  }

  SUBCASE("mse loss converges and history stays finite") {
    OptimConfig cfg;
    cfg.steps = 60;
    cfg.loss_kind = LossKind::mse;
    OptimizeResult r = optimise_hologram(corpus_image(0, 64, 1), ctx, DisplayConfig{}, cfg);
    for (double v : r.history) CHECK(std::isfinite(v));
    CHECK(r.history.back() < 0.5 * r.history.front());
  }

  SUBCASE("channel/wavelength mismatch is rejected") {
    DisplayConfig disp;
    disp.wavelengths_m = {520e-9, 638e-9};
    OptimConfig cfg;
    cfg.steps = 1;
    CHECK_THROWS_AS(optimise_hologram(target, ctx, disp, cfg), InvalidConfig);
  }
}

TEST_CASE("raising foveal_weight does not hurt foveal accuracy") {
  GazeContext ctx = test_ctx();
  Image target = corpus_image(2, 64, 1);
  auto plan = PerceptPlan::build(64, 64, 1, ctx);
  auto foveal_mse_for = [&](double w) {
    LossConfig lc;
    lc.foveal_weight = w;
    OptimConfig cfg;
    cfg.steps = 60;
    cfg.loss_kind = LossKind::metameric;
    cfg.seed = 5;
    OptimizeResult r = optimise_hologram(target, ctx, DisplayConfig{}, cfg, lc);
    HologramObjective obj(target, ctx, DisplayConfig{}, LossKind::metameric, lc, cfg.seed);
    return masked_mse(obj.reconstruct_display(r.phase), target, plan->foveal_mask);
  };
  // regression trend, not a theorem: allow 10% slack
  const double low = foveal_mse_for(0.25);
  const double high = foveal_mse_for(4.0);
  CHECK(high <= 1.1 * low);
}

TEST_CASE("quantized export round-trips to nearly the same reconstruction") {
  GazeContext ctx = test_ctx();
  Image target = corpus_image(0, 64, 1);
  OptimConfig cfg;
  cfg.steps = 40;
  cfg.loss_kind = LossKind::mse;
  OptimizeResult r = optimise_hologram(target, ctx, DisplayConfig{}, cfg);

  Image direct = reconstruct_intensity(r.phase, 0.15, {520e-9});
  PhaseMap roundtrip = dequantize_phase(quantize_phase(r.phase));
  Image quantized = reconstruct_intensity(roundtrip, 0.15, {520e-9});
  // 8-bit phase codes cost at most pi/256 per element; the intensity
  // perturbation lands around 40 dB PSNR (measured 40.0; regression bound)
  CHECK(psnr_db(quantized.channels[0], direct.channels[0]) >= 35.0);
}

TEST_CASE("warm start does not regress a converged run") {
  GazeContext ctx = test_ctx();
  Image target = corpus_image(3, 64, 1);
  OptimConfig cfg;
  cfg.steps = 100;
  cfg.loss_kind = LossKind::metameric;
  OptimizeResult full = optimise_hologram(target, ctx, DisplayConfig{}, cfg);

  OptimizeResult warm = warm_start_optimise(full.phase, target, ctx, DisplayConfig{}, cfg);
  CHECK(warm.history.size() == static_cast<size_t>(cfg.warm_steps));
  // history.front() is the exact loss of the previous phase
  CHECK(warm.history.back() <= warm.history.front() * 1.01);
}

TEST_CASE("temporal_sequence") {
  GazeContext ctx = test_ctx();
  FlatTarget ft = flat_target(64, 1);
  OptimConfig cfg;
  cfg.steps = 60;
  cfg.loss_kind = LossKind::metameric;
  cfg.seed = 31;
  DisplayConfig disp;

  SUBCASE("count = 1 is equivalent to optimise_hologram") {
    TemporalResult tr = temporal_sequence(ft.image, ctx, disp, cfg, {}, 1);
    OptimizeResult r = optimise_hologram(ft.image, ctx, disp, cfg);
    REQUIRE(tr.phases.size() == 1);
    CHECK(phases_identical(tr.phases[0], r.phase));
  }

  SUBCASE("count = 5 produces varying frames whose average is cleaner") {
    OptimConfig tcfg = cfg;
    tcfg.warm_steps = 50;
    tcfg.warm_lr_scale = 1.0;
    TemporalResult tr = temporal_sequence(ft.image, ctx, disp, tcfg, {}, 5);
    REQUIRE(tr.phases.size() == 5);

    HologramObjective obj(ft.image, ctx, disp, tcfg.loss_kind, {}, tcfg.seed);
    std::vector<Image> recons;
    for (const auto& p : tr.phases) recons.push_back(obj.reconstruct_display(p));

    Grid mask(64, 64, 0.0);
    for (int y = ft.y; y < ft.y + ft.h; ++y)
      for (int x = ft.x; x < ft.x + ft.w; ++x) mask.at(x, y) = 1.0;

    // cross-frame variance in the flat window is strictly positive
    double var_acc = 0.0;
    for (int y = ft.y; y < ft.y + ft.h; ++y)
      for (int x = ft.x; x < ft.x + ft.w; ++x) {
        double mean = 0.0;
        for (const Image& r : recons) mean += r.channels[0].at(x, y);
        mean /= recons.size();
        for (const Image& r : recons) {
          const double d = r.channels[0].at(x, y) - mean;
          var_acc += d * d;
        }
      }
    CHECK(var_acc > 0.0);

    const double single = masked_mse(recons[0], ft.image, mask);
    const double avg = masked_mse(tr.average, ft.image, mask);
    CHECK(avg < single);

    // consecutive reconstructions stay metamerically consistent
    Image noise = uniform_noise_image(64, 64, 1, 17);
    const double baseline = metameric_loss(recons[0], noise, ctx);
    for (size_t k = 1; k < recons.size(); ++k)
      CHECK(metameric_loss(recons[k], recons[k - 1], ctx) <= 0.2 * baseline);
  }

  SUBCASE("count = 0 is rejected") {
    CHECK_THROWS_AS(temporal_sequence(ft.image, ctx, disp, cfg, {}, 0), InvalidConfig);
  }
}

}  // TEST_SUITE
