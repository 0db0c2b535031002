#include "fovholo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fovholo/errors.hpp"
#include "fovholo/imageio.hpp"
#include "fovholo/perception.hpp"
#include "fovholo/slm.hpp"
#include "fovholo/version.hpp"

namespace fovholo {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// config serialization

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("corrupt config file " + path + ": " + e.what());
  }

  RunConfig cfg;
  try {
    if (j.contains("propagation")) {
      const json& p = j["propagation"];
      maybe(p, "pitch_m", cfg.pitch_m);
      maybe(p, "wavelengths_m", cfg.wavelengths_m);
      maybe(p, "distance_m", cfg.distance_m);
      maybe(p, "pad", cfg.pad);
      maybe(p, "slm_width", cfg.slm_width);
      maybe(p, "slm_height", cfg.slm_height);
    }
    if (j.contains("gaze")) {
      const json& g = j["gaze"];
      if (g.contains("xy")) {
        cfg.gaze.gaze_x = g["xy"].at(0).get<double>();
        cfg.gaze.gaze_y = g["xy"].at(1).get<double>();
      }
      maybe(g, "pixels_per_degree", cfg.gaze.pixels_per_degree);
      maybe(g, "alpha", cfg.gaze.alpha);
      maybe(g, "fovea_threshold_px", cfg.gaze.fovea_threshold_px);
    }
    if (j.contains("optim")) {
      const json& o = j["optim"];
      maybe(o, "steps", cfg.optim.steps);
      maybe(o, "learning_rate", cfg.optim.learning_rate);
      maybe(o, "beta1", cfg.optim.beta1);
      maybe(o, "beta2", cfg.optim.beta2);
      maybe(o, "eps", cfg.optim.eps);
      maybe(o, "seed", cfg.optim.seed);
      maybe(o, "warm_steps", cfg.optim.warm_steps);
      maybe(o, "warm_lr_scale", cfg.optim.warm_lr_scale);
      if (o.contains("loss"))
        cfg.optim.loss_kind = loss_kind_from_name(o["loss"].get<std::string>());
    }
    if (j.contains("loss")) {
      const json& l = j["loss"];
      if (l.contains("feature_norm")) {
        const std::string n = l["feature_norm"].get<std::string>();
        if (n == "l1") cfg.loss.feature_norm = FeatureNorm::L1;
        else if (n == "l2") cfg.loss.feature_norm = FeatureNorm::L2;
        else throw InvalidConfig("feature_norm must be l1 or l2");
      }
      if (l.contains("channel_weights")) {
        auto w = l["channel_weights"].get<std::vector<double>>();
        if (w.size() != 3) throw InvalidConfig("channel_weights needs 3 entries");
        std::copy(w.begin(), w.end(), cfg.loss.channel_weights.begin());
      }
      maybe(l, "foveal_weight", cfg.loss.foveal_weight);
      maybe(l, "level_count", cfg.loss.level_count);
    }
    if (j.contains("io")) {
      const json& io = j["io"];
      maybe(io, "target", cfg.target_path);
      maybe(io, "out", cfg.out_dir);
      maybe(io, "resize", cfg.resize);
      maybe(io, "linear", cfg.linear);
    }
    if (j.contains("compare")) {
      maybe(j["compare"], "losses", cfg.compare_losses);
      if (j["compare"].contains("inset_window")) {
        auto w = j["compare"]["inset_window"].get<std::vector<int>>();
        if (w.size() != 4) throw InvalidConfig("compare.inset_window needs 4 entries");
        cfg.inset_window = Rect{w[0], w[1], w[2], w[3]};
      }
    }
    if (j.contains("average")) {
      maybe(j["average"], "count", cfg.average_count);
      if (j["average"].contains("window")) {
        auto w = j["average"]["window"].get<std::vector<int>>();
        if (w.size() != 4) throw InvalidConfig("average.window needs 4 entries");
        cfg.metric_window = Rect{w[0], w[1], w[2], w[3]};
      }
    }
    if (j.contains("encode")) maybe(j["encode"], "grating", cfg.grating);
  } catch (const json::exception& e) {
    throw FormatError("bad config value in " + path + ": " + e.what());
  }
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["propagation"] = {{"pitch_m", cfg.pitch_m},
                      {"wavelengths_m", cfg.wavelengths_m},
                      {"distance_m", cfg.distance_m},
                      {"pad", cfg.pad},
                      {"slm_width", cfg.slm_width},
                      {"slm_height", cfg.slm_height}};
  j["gaze"] = {{"xy", {cfg.gaze.gaze_x, cfg.gaze.gaze_y}},
               {"pixels_per_degree", cfg.gaze.pixels_per_degree},
               {"alpha", cfg.gaze.alpha},
               {"fovea_threshold_px", cfg.gaze.fovea_threshold_px}};
  j["optim"] = {{"steps", cfg.optim.steps},
                {"learning_rate", cfg.optim.learning_rate},
                {"beta1", cfg.optim.beta1},
                {"beta2", cfg.optim.beta2},
                {"eps", cfg.optim.eps},
                {"seed", cfg.optim.seed},
                {"loss", loss_kind_name(cfg.optim.loss_kind)},
                {"warm_steps", cfg.optim.warm_steps},
                {"warm_lr_scale", cfg.optim.warm_lr_scale}};
  j["loss"] = {{"feature_norm", cfg.loss.feature_norm == FeatureNorm::L1 ? "l1" : "l2"},
               {"channel_weights", cfg.loss.channel_weights},
               {"foveal_weight", cfg.loss.foveal_weight},
               {"level_count", cfg.loss.level_count}};
  j["io"] = {{"target", cfg.target_path},
             {"out", cfg.out_dir},
             {"resize", cfg.resize},
             {"linear", cfg.linear}};
  json cmp = {{"losses", cfg.compare_losses}};
  if (cfg.inset_window)
    cmp["inset_window"] = {cfg.inset_window->x, cfg.inset_window->y, cfg.inset_window->w,
                           cfg.inset_window->h};
  j["compare"] = cmp;
  json avg = {{"count", cfg.average_count}};
  if (cfg.metric_window)
    avg["window"] = {cfg.metric_window->x, cfg.metric_window->y, cfg.metric_window->w,
                     cfg.metric_window->h};
  j["average"] = avg;
  j["encode"] = {{"grating", cfg.grating}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// manifest helpers

uint64_t fnv1a_hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot hash missing file: " + path);
  uint64_t h = 1469598103934665603ull;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write file: " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

namespace {

std::string hash_string(const std::string& path) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                static_cast<unsigned long long>(fnv1a_hash_file(path)));
  return buf;
}

struct Manifest {
  std::string command;
  json extra = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  void write(const RunConfig& cfg) const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["config"] = json::parse(run_config_to_json(cfg));
    if (!extra.empty()) j["results"] = extra;
    json in = json::object(), out = json::object();
    for (const std::string& p : inputs) in[p] = hash_string(p);
    for (const std::string& p : outputs) out[p] = hash_string(p);
    j["inputs"] = in;
    j["outputs"] = out;
    atomic_write_text((fs::path(cfg.out_dir) / "manifest.json").string(), j.dump(2) + "\n");
  }
};

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw FormatError("cannot create output directory: " + cfg.out_dir);
}

Image load_target(const RunConfig& cfg) {
  if (cfg.target_path.empty()) throw InvalidConfig("no target image given (--target)");
  if (!fs::exists(cfg.target_path))
    throw FormatError("target image not found: " + cfg.target_path);
  Image img = load_image_png(cfg.target_path, !cfg.linear).image;
  if (cfg.slm_width > 0 && cfg.slm_height > 0 &&
      (img.width != cfg.slm_width || img.height != cfg.slm_height)) {
    if (!cfg.resize)
      throw InvalidConfig("target dimensions do not match the configured SLM size (use --resize)");
    img = resize_bicubic(img, cfg.slm_width, cfg.slm_height);
  }
  return img;
}

DisplayConfig display_for(const RunConfig& cfg, int channels) {
  DisplayConfig d;
  d.pitch_m = cfg.pitch_m;
  d.distance_m = cfg.distance_m;
  d.wavelengths_m =
      cfg.wavelengths_m.empty() ? default_wavelengths(channels) : cfg.wavelengths_m;
  d.pad = cfg.pad;
  return d;
}

ProgressCallback make_progress(const RunConfig& cfg, const std::string& label) {
  if (cfg.quiet) return nullptr;
  const int every = std::max(1, cfg.optim.steps / 10);
  return [every, label](int it, double loss) {
    if (it % every == 0) std::fprintf(stderr, "%s iter %d loss %.6g\n", label.c_str(), it, loss);
  };
}

void save_reconstruction(const RunConfig& cfg, const Image& recon, const std::string& stem,
                         Manifest& m) {
  const std::string png = (fs::path(cfg.out_dir) / (stem + ".png")).string();
  const std::string f32 = (fs::path(cfg.out_dir) / (stem + ".f32")).string();
  save_image_png(png, recon, 16, !cfg.linear);
  save_raw_f32(f32, recon);
  m.outputs.push_back(png);
  m.outputs.push_back(f32);
}

std::string export_phase_artifacts(const RunConfig& cfg, const PhaseMap& phase,
                                   const std::vector<double>& wavelengths,
                                   const std::string& stem, const std::string& grating,
                                   Manifest& m) {
  PhaseArtifactMeta meta;
  meta.pitch_m = cfg.pitch_m;
  meta.wavelengths_m = wavelengths;
  meta.distance_m = cfg.distance_m;
  meta.gaze_x = cfg.gaze.gaze_x;
  meta.gaze_y = cfg.gaze.gaze_y;
  meta.grating = grating;
  const std::string prefix = (fs::path(cfg.out_dir) / stem).string();
  export_phase(prefix, quantize_phase(phase), meta);
  m.outputs.push_back(prefix + ".json");
  for (int c = 0; c < phase.channel_count(); ++c)
    m.outputs.push_back(prefix + "_c" + std::to_string(c) + ".png");
  return prefix;
}

void write_history(const RunConfig& cfg, const std::vector<double>& history, Manifest& m) {
  std::ostringstream os;
  os << "iteration\tloss\n";
  for (size_t i = 0; i < history.size(); ++i) os << i << "\t" << history[i] << "\n";
  const std::string path = (fs::path(cfg.out_dir) / "history.tsv").string();
  atomic_write_text(path, os.str());
  m.outputs.push_back(path);
}

Rect clamp_rect(Rect r, int w, int h) {
  r.x = std::clamp(r.x, 0, w - 1);
  r.y = std::clamp(r.y, 0, h - 1);
  r.w = std::clamp(r.w, 1, w - r.x);
  r.h = std::clamp(r.h, 1, h - r.y);
  return r;
}

Image crop_image(const Image& img, const Rect& r) {
  Image out(r.w, r.h, img.channel_count());
  for (int c = 0; c < img.channel_count(); ++c)
    for (int y = 0; y < r.h; ++y)
      for (int x = 0; x < r.w; ++x)
        out.channels[c].at(x, y) = img.channels[c].at(r.x + x, r.y + y);
  return out;
}

Image side_by_side(const Image& a, const Image& b) {
  const int gap = 2;
  Image out(a.width + gap + b.width, std::max(a.height, b.height), a.channel_count(), 1.0);
  for (int c = 0; c < a.channel_count(); ++c) {
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x) out.channels[c].at(x, y) = a.channels[c].at(x, y);
    for (int y = 0; y < b.height; ++y)
      for (int x = 0; x < b.width; ++x)
        out.channels[c].at(a.width + gap + x, y) = b.channels[c].at(x, y);
  }
  return out;
}

Image to_display_units(Image raw, const std::vector<double>& target_scale) {
  for (int c = 0; c < raw.channel_count(); ++c)
    for (double& v : raw.channels[c].data) v /= target_scale[c];
  return raw;
}

/// Foveal radius in pixels: where alpha * e^2 * ppd reaches 1 px.
double foveal_radius_px(const GazeContext& g) {
  if (g.alpha <= 0.0) return 32.0;
  return std::sqrt(g.pixels_per_degree / g.alpha);
}

struct InsetRects {
  Rect fovea;
  Rect periphery;
};

InsetRects inset_rects(const GazeContext& g, int w, int h) {
  const double r = foveal_radius_px(g);
  const int half = std::clamp(static_cast<int>(std::lround(r)), 8, std::max(8, std::min(w, h) / 4));
  const int gx = static_cast<int>(std::lround(g.gaze_x * w));
  const int gy = static_cast<int>(std::lround(g.gaze_y * h));
  InsetRects rects;
  rects.fovea = clamp_rect({gx - half, gy - half, 2 * half, 2 * half}, w, h);
  const int px = gx + static_cast<int>(std::lround(2.0 * r));
  rects.periphery = clamp_rect({px - half, gy - half, 2 * half, 2 * half}, w, h);
  return rects;
}

}  // namespace

// ---------------------------------------------------------------------------
// commands

void cmd_optimise(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  Image target = load_target(cfg);
  DisplayConfig disp = display_for(cfg, target.channel_count());

  OptimizeResult result = optimise_hologram(target, cfg.gaze, disp, cfg.optim, cfg.loss,
                                            make_progress(cfg, "optimise"));
  Image recon = to_display_units(
      reconstruct_intensity(result.phase, disp.distance_m, disp.wavelengths_m, disp.pad),
      result.target_scale);

  Manifest m;
  m.command = "optimise";
  m.inputs.push_back(cfg.target_path);
  export_phase_artifacts(cfg, result.phase, disp.wavelengths_m, "phase", "none", m);
  save_reconstruction(cfg, recon, "reconstruction", m);
  write_history(cfg, result.history, m);
  m.extra["final_loss"] = result.history.back();
  m.extra["initial_loss"] = result.history.front();
  m.extra["target_scale"] = result.target_scale;
  m.write(cfg);
}

void cmd_simulate(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.phase_path.empty()) throw InvalidConfig("no phase artifact given (--phase)");
  ImportedPhase imported = import_phase(cfg.phase_path);
  if (!cfg.wavelengths_m.empty() && cfg.wavelengths_m != imported.meta.wavelengths_m)
    throw InvalidConfig("requested wavelengths conflict with the phase sidecar");

  const double d = cfg.distance_override.value_or(imported.meta.distance_m);
  PhaseMap phase = dequantize_phase(imported.quantized);
  Image recon = reconstruct_intensity(phase, d, imported.meta.wavelengths_m, cfg.pad);

  Manifest m;
  m.command = "simulate";
  m.inputs.push_back(cfg.phase_path.size() > 5 && cfg.phase_path.ends_with(".json")
                         ? cfg.phase_path
                         : cfg.phase_path + ".json");
  save_reconstruction(cfg, recon, "reconstruction", m);
  m.extra["distance_m"] = d;
  m.write(cfg);
}

void cmd_compare(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  Image target = load_target(cfg);
  DisplayConfig disp = display_for(cfg, target.channel_count());
  auto plan = PerceptPlan::build(target.width, target.height, target.channel_count(),
                                 cfg.gaze, cfg.loss.level_count);
  InsetRects rects = inset_rects(cfg.gaze, target.width, target.height);
  if (cfg.inset_window)
    rects.periphery = clamp_rect(*cfg.inset_window, target.width, target.height);

  Manifest m;
  m.command = "compare";
  m.inputs.push_back(cfg.target_path);

  std::ostringstream report;
  report << "loss\tmse\tfoveal_mse\tperipheral_mse\tmetameric\n";
  for (const std::string& name : cfg.compare_losses) {
    OptimConfig oc = cfg.optim;
    oc.loss_kind = loss_kind_from_name(name);  // same seed across rows
    OptimizeResult r =
        optimise_hologram(target, cfg.gaze, disp, oc, cfg.loss, make_progress(cfg, name));
    Image recon = to_display_units(
        reconstruct_intensity(r.phase, disp.distance_m, disp.wavelengths_m, disp.pad),
        r.target_scale);

    const double full = mse_loss(recon, target);
    const double fov = masked_mse(recon, target, plan->foveal_mask);
    const double periph = masked_mse(recon, target, plan->scales[0].nonfoveal_mask);
    const double metameric = metameric_loss(recon, target, cfg.gaze, cfg.loss);
    report << name << "\t" << full << "\t" << fov << "\t" << periph << "\t" << metameric
           << "\n";

    for (const auto& [rect, tag] :
         {std::pair{rects.fovea, "fovea"}, std::pair{rects.periphery, "periphery"}}) {
      const std::string path =
          (fs::path(cfg.out_dir) / (name + std::string("_") + tag + ".png")).string();
      save_image_png(path, side_by_side(crop_image(recon, rect), crop_image(target, rect)), 8,
                     !cfg.linear);
      m.outputs.push_back(path);
    }
    json row;
    row["loss"] = name;
    row["mse"] = full;
    row["foveal_mse"] = fov;
    row["peripheral_mse"] = periph;
    row["metameric"] = metameric;
    m.extra["rows"].push_back(row);
  }
  const std::string report_path = (fs::path(cfg.out_dir) / "report.tsv").string();
  atomic_write_text(report_path, report.str());
  m.outputs.push_back(report_path);
  m.write(cfg);
}

void cmd_metamer(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  Image target = load_target(cfg);
  Image metamer = synthesize_metamer(target, cfg.gaze, cfg.optim.seed);

  Image noise = uniform_noise_image(target.width, target.height, target.channel_count(),
                                    cfg.optim.seed + 1);
  const double lm = metameric_loss(metamer, target, cfg.gaze, cfg.loss);
  const double ln = metameric_loss(noise, target, cfg.gaze, cfg.loss);

  Manifest m;
  m.command = "metamer";
  m.inputs.push_back(cfg.target_path);
  const std::string standalone = (fs::path(cfg.out_dir) / "metamer.png").string();
  const std::string composite = (fs::path(cfg.out_dir) / "composite.png").string();
  save_image_png(standalone, metamer, 16, !cfg.linear);
  save_image_png(composite, side_by_side(metamer, target), 8, !cfg.linear);
  m.outputs.push_back(standalone);
  m.outputs.push_back(composite);
  m.extra["metameric_loss"] = lm;
  m.extra["noise_loss"] = ln;
  m.extra["ratio"] = ln > 0 ? lm / ln : 0.0;
  m.extra["acceptance_ratio"] = 0.05;
  m.extra["below_acceptance_ratio"] = ln > 0 && lm <= 0.05 * ln;
  m.write(cfg);
}

void cmd_average(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  Image target = load_target(cfg);
  DisplayConfig disp = display_for(cfg, target.channel_count());

  TemporalResult tr = temporal_sequence(target, cfg.gaze, disp, cfg.optim, cfg.loss,
                                        cfg.average_count, make_progress(cfg, "average"));

  Manifest m;
  m.command = "average";
  m.inputs.push_back(cfg.target_path);

  std::vector<Image> recons;
  for (size_t k = 0; k < tr.phases.size(); ++k) {
    recons.push_back(to_display_units(
        reconstruct_intensity(tr.phases[k], disp.distance_m, disp.wavelengths_m, disp.pad),
        tr.target_scale));
    export_phase_artifacts(cfg, tr.phases[k], disp.wavelengths_m,
                           "phase_f" + std::to_string(k), "none", m);
  }
  save_reconstruction(cfg, recons[0], "single_frame", m);
  save_reconstruction(cfg, tr.average, "average", m);

  Rect window = cfg.metric_window.value_or(Rect{0, 0, target.width, target.height});
  window = clamp_rect(window, target.width, target.height);
  Grid mask(target.width, target.height, 0.0);
  for (int y = window.y; y < window.y + window.h; ++y)
    for (int x = window.x; x < window.x + window.w; ++x) mask.at(x, y) = 1.0;

  const double mse_single = masked_mse(recons[0], target, mask);
  const double mse_avg = masked_mse(tr.average, target, mask);
  double variance = 0.0;
  {
    double acc = 0.0, count = 0.0;
    for (int c = 0; c < target.channel_count(); ++c)
      for (int y = window.y; y < window.y + window.h; ++y)
        for (int x = window.x; x < window.x + window.w; ++x) {
          double mean = 0.0;
          for (const Image& r : recons) mean += r.channels[c].at(x, y);
          mean /= recons.size();
          double v = 0.0;
          for (const Image& r : recons) {
            const double d = r.channels[c].at(x, y) - mean;
            v += d * d;
          }
          acc += v / recons.size();
          count += 1.0;
        }
    variance = count > 0 ? acc / count : 0.0;
  }

  std::ostringstream metrics;
  metrics << "count\twindow\tmse_single\tmse_average\tratio\tcross_frame_variance\n";
  metrics << cfg.average_count << "\t" << window.x << "," << window.y << "," << window.w
          << "," << window.h << "\t" << mse_single << "\t" << mse_avg << "\t"
          << (mse_single > 0 ? mse_avg / mse_single : 0.0) << "\t" << variance << "\n";
  const std::string metrics_path = (fs::path(cfg.out_dir) / "metrics.tsv").string();
  atomic_write_text(metrics_path, metrics.str());
  m.outputs.push_back(metrics_path);

  m.extra["mse_single"] = mse_single;
  m.extra["mse_average"] = mse_avg;
  m.extra["cross_frame_variance"] = variance;
  m.write(cfg);
}

void cmd_encode(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  if (cfg.phase_path.empty()) throw InvalidConfig("no phase artifact given (--phase)");
  if (cfg.grating != "none" && cfg.grating != "horizontal")
    throw InvalidConfig("grating must be none or horizontal");
  ImportedPhase imported = import_phase(cfg.phase_path);

  PhaseMap phase = dequantize_phase(imported.quantized);
  if (imported.meta.grating != cfg.grating)
    phase = apply_horizontal_grating(phase);  // involution toggles either way

  Manifest m;
  m.command = "encode";
  m.inputs.push_back(cfg.phase_path.size() > 5 && cfg.phase_path.ends_with(".json")
                         ? cfg.phase_path
                         : cfg.phase_path + ".json");
  PhaseArtifactMeta meta = imported.meta;
  meta.grating = cfg.grating;
  meta.version = kVersion;
  const std::string prefix = (fs::path(cfg.out_dir) / "phase").string();
  export_phase(prefix, quantize_phase(phase, imported.quantized.bits), meta);
  m.outputs.push_back(prefix + ".json");
  for (int c = 0; c < phase.channel_count(); ++c)
    m.outputs.push_back(prefix + "_c" + std::to_string(c) + ".png");
  m.write(cfg);
}

int run_command(const std::string& verb, const RunConfig& cfg) {
  try {
    if (verb == "optimise") cmd_optimise(cfg);
    else if (verb == "simulate") cmd_simulate(cfg);
    else if (verb == "compare") cmd_compare(cfg);
    else if (verb == "metamer") cmd_metamer(cfg);
    else if (verb == "average") cmd_average(cfg);
    else if (verb == "encode") cmd_encode(cfg);
    else {
      std::fprintf(stderr, "error: unknown command '%s'\n", verb.c_str());
      return kExitConfig;
    }
    return kExitOk;
  } catch (const Diverged& e) {
    std::fprintf(stderr, "error: optimization diverged at iteration %d: %s\n", e.iteration,
                 e.what());
    return kExitDiverged;
  } catch (const InvalidConfig& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace fovholo
