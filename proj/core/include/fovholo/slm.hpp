#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fovholo/propagation.hpp"

namespace fovholo {

/// 8-bit SLM drive codes; code v maps to phase 2*pi*v / 2^bits.
struct QuantizedPhase {
  int width = 0;
  int height = 0;
  double pitch_m = 0.0;
  int bits = 8;  // 1..8
  std::vector<std::vector<uint8_t>> channels;  // row-major code planes

  int channel_count() const { return static_cast<int>(channels.size()); }
};

/// Shifts even columns (floor(x) even) by pi, pushing the reconstruction away
/// from the undiffracted zeroth order. Involutive: applying twice restores
/// the input exactly.
PhaseMap apply_horizontal_grating(const PhaseMap& phase);

QuantizedPhase quantize_phase(const PhaseMap& phase, int bits = 8);
PhaseMap dequantize_phase(const QuantizedPhase& q);

/// Sidecar contents for exported phase files.
struct PhaseArtifactMeta {
  double pitch_m = kDefaultPitchM;
  std::vector<double> wavelengths_m;
  double distance_m = kDefaultDistanceM;
  double gaze_x = 0.5, gaze_y = 0.5;
  std::string grating = "none";  // none | horizontal
  std::string version;
  int bits = 8;
};

/// Writes one 8-bit grayscale PNG per channel (<prefix>_c<k>.png) plus a
/// JSON sidecar (<prefix>.json) with fields pitch_m, wavelengths_m,
/// distance_m, gaze_xy, grating, version.
void export_phase(const std::string& prefix, const QuantizedPhase& q,
                  const PhaseArtifactMeta& meta);

struct ImportedPhase {
  QuantizedPhase quantized;
  PhaseArtifactMeta meta;
};

/// Accepts the export prefix or the sidecar path itself; round-trips
/// export_phase bit-exactly. Dimension mismatches against the sidecar are
/// format errors.
ImportedPhase import_phase(const std::string& prefix_or_sidecar);

}  // namespace fovholo
