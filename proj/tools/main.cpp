// Command-line front end: optimise, simulate, compare, metamer, encode, average.

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "fovholo/cli.hpp"
#include "fovholo/errors.hpp"
#include "fovholo/version.hpp"

namespace {

bool parse_gaze(const std::string& text, fovholo::GazeContext& gaze) {
  if (text == "center") {
    gaze.gaze_x = 0.5;
    gaze.gaze_y = 0.5;
    return true;
  }
  double x = 0, y = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf", &x, &y) != 2) return false;
  gaze.gaze_x = x;
  gaze.gaze_y = y;
  return true;
}

struct Flags {
  std::string config;
  std::string target;
  std::string gaze;
  std::string loss;
  std::string out;
  std::string phase;
  std::string grating;
  std::string losses_csv;
  std::string window;
  std::string inset;
  std::optional<double> distance;
  std::optional<double> alpha;
  std::optional<double> ppd;
  std::optional<double> lr;
  std::optional<int> steps;
  std::optional<uint64_t> seed;
  std::optional<int> count;
  std::optional<int> slm_width, slm_height;
  bool resize = false;
  bool linear = false;
  bool pad = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file (flags override file values)");
  cmd->add_option("--target", f.target, "target image (PNG)");
  cmd->add_option("--gaze", f.gaze, "fixation as x,y in [0,1] or 'center'");
  cmd->add_option("--distance", f.distance, "propagation distance in meters");
  cmd->add_option("--alpha", f.alpha, "pooling rate (deg per deg^2)");
  cmd->add_option("--ppd", f.ppd, "pixels per degree");
  cmd->add_option("--loss", f.loss, "loss kind (metameric|mse|blur_match|blur_lowpass|metamer_target)");
  cmd->add_option("--steps", f.steps, "optimization steps");
  cmd->add_option("--lr", f.lr, "learning rate");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--slm-width", f.slm_width, "SLM width in pixels (0 = target)");
  cmd->add_option("--slm-height", f.slm_height, "SLM height in pixels (0 = target)");
  cmd->add_flag("--resize", f.resize, "bicubic-resize the target to the SLM size");
  cmd->add_flag("--linear", f.linear, "treat image files as linear (skip sRGB transfer)");
  cmd->add_flag("--pad", f.pad, "2x zero-padded propagation");
  cmd->add_flag("--quiet", f.quiet, "suppress progress output");
}

int apply_flags(const Flags& f, fovholo::RunConfig& cfg) {
  if (!f.config.empty()) cfg = fovholo::load_run_config(f.config);
  if (!f.target.empty()) cfg.target_path = f.target;
  if (!f.gaze.empty() && !parse_gaze(f.gaze, cfg.gaze)) {
    std::fprintf(stderr, "error: bad --gaze value '%s'\n", f.gaze.c_str());
    return fovholo::kExitConfig;
  }
  if (f.distance) cfg.distance_m = *f.distance;
  if (f.alpha) cfg.gaze.alpha = *f.alpha;
  if (f.ppd) cfg.gaze.pixels_per_degree = *f.ppd;
  if (!f.loss.empty()) cfg.optim.loss_kind = fovholo::loss_kind_from_name(f.loss);
  if (f.steps) cfg.optim.steps = *f.steps;
  if (f.lr) cfg.optim.learning_rate = *f.lr;
  if (f.seed) cfg.optim.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.slm_width) cfg.slm_width = *f.slm_width;
  if (f.slm_height) cfg.slm_height = *f.slm_height;
  if (f.resize) cfg.resize = true;
  if (f.linear) cfg.linear = true;
  if (f.pad) cfg.pad = true;
  if (f.quiet) cfg.quiet = true;
  if (!f.phase.empty()) cfg.phase_path = f.phase;
  if (!f.grating.empty()) cfg.grating = f.grating;
  if (!f.losses_csv.empty()) {
    cfg.compare_losses.clear();
    std::string item;
    for (char c : f.losses_csv + ",") {
      if (c == ',') {
        if (!item.empty()) cfg.compare_losses.push_back(item);
        item.clear();
      } else {
        item += c;
      }
    }
  }
  if (f.count) cfg.average_count = *f.count;
  if (!f.window.empty()) {
    fovholo::Rect r;
    if (std::sscanf(f.window.c_str(), "%d,%d,%d,%d", &r.x, &r.y, &r.w, &r.h) != 4) {
      std::fprintf(stderr, "error: bad --window value '%s'\n", f.window.c_str());
      return fovholo::kExitConfig;
    }
    cfg.metric_window = r;
  }
  if (!f.inset.empty()) {
    fovholo::Rect r;
    if (std::sscanf(f.inset.c_str(), "%d,%d,%d,%d", &r.x, &r.y, &r.w, &r.h) != 4) {
      std::fprintf(stderr, "error: bad --inset value '%s'\n", f.inset.c_str());
      return fovholo::kExitConfig;
    }
    cfg.inset_window = r;
  }
  return fovholo::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-only hologram optimization with a gaze-contingent metameric loss"};
  app.set_version_flag("--version", fovholo::kVersion);
  app.require_subcommand(1);

  Flags f;
  CLI::App* optimise = app.add_subcommand("optimise", "optimize a hologram for a target image");
  add_common(optimise, f);

  CLI::App* simulate = app.add_subcommand("simulate", "reconstruct from exported phase files");
  add_common(simulate, f);
  simulate->add_option("--phase", f.phase, "phase artifact prefix or sidecar path");

  CLI::App* compare = app.add_subcommand("compare", "optimize with several losses and report metrics");
  add_common(compare, f);
  compare->add_option("--losses", f.losses_csv, "comma-separated loss list");
  compare->add_option("--inset", f.inset, "peripheral inset window x,y,w,h");

  CLI::App* metamer = app.add_subcommand("metamer", "synthesize a metamer of the target");
  add_common(metamer, f);

  CLI::App* encode = app.add_subcommand("encode", "re-encode phase files (grating, quantization)");
  add_common(encode, f);
  encode->add_option("--phase", f.phase, "phase artifact prefix or sidecar path");
  encode->add_option("--grating", f.grating, "none|horizontal");

  CLI::App* average = app.add_subcommand("average", "temporal sequence of holograms and their mean");
  add_common(average, f);
  average->add_option("--count", f.count, "number of holograms");
  average->add_option("--window", f.window, "metric window x,y,w,h");

  CLI11_PARSE(app, argc, argv);

  fovholo::RunConfig cfg;
  try {
    const int rc = apply_flags(f, cfg);
    if (rc != fovholo::kExitOk) return rc;
  } catch (const fovholo::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return fovholo::kExitIo;
  } catch (const fovholo::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return fovholo::kExitConfig;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  return fovholo::run_command(verb, cfg);
}
