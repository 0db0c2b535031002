#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fovholo/losses.hpp"
#include "fovholo/optimizer.hpp"

namespace fovholo {

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
};

/// Aggregate configuration for all CLI commands. Serialized as JSON with
/// groups mirroring the member structure; command-line flags override file
/// values.
struct RunConfig {
  // propagation / display
  double pitch_m = kDefaultPitchM;
  std::vector<double> wavelengths_m;  // empty = per-channel defaults
  double distance_m = kDefaultDistanceM;
  bool pad = false;
  int slm_width = 0;   // 0 = take from target
  int slm_height = 0;

  GazeContext gaze;
  OptimConfig optim;
  LossConfig loss;

  // io
  std::string target_path;
  std::string out_dir = "out";
  bool resize = false;
  bool linear = false;

  // command extras
  std::string phase_path;                    // simulate / encode
  std::optional<double> distance_override;   // simulate
  std::vector<std::string> compare_losses = {"metameric", "mse", "blur_match",
                                             "blur_lowpass", "metamer_target"};
  std::optional<Rect> inset_window;          // compare: peripheral inset override
  int average_count = 5;
  std::optional<Rect> metric_window;         // average
  std::string grating = "horizontal";        // encode
  bool quiet = false;
};

RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

uint64_t fnv1a_hash_file(const std::string& path);
void atomic_write_text(const std::string& path, const std::string& content);

void cmd_optimise(const RunConfig& cfg);
void cmd_simulate(const RunConfig& cfg);
void cmd_compare(const RunConfig& cfg);
void cmd_metamer(const RunConfig& cfg);
void cmd_average(const RunConfig& cfg);
void cmd_encode(const RunConfig& cfg);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitDiverged = 4;

/// Dispatches a verb and maps exceptions onto the exit codes above
/// (unexpected errors return 1).
int run_command(const std::string& verb, const RunConfig& cfg);

}  // namespace fovholo
