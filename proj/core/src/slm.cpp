#include "fovholo/slm.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "fovholo/errors.hpp"
#include "fovholo/imageio.hpp"
#include "fovholo/version.hpp"

namespace fovholo {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
using nlohmann::json;
}  // namespace

PhaseMap apply_horizontal_grating(const PhaseMap& phase) {
  PhaseMap out = phase;
  for (Grid& c : out.channels)
    for (int y = 0; y < c.height; ++y)
      for (int x = 0; x < c.width; x += 2)  // even columns only
        c.at(x, y) = wrap_phase(c.at(x, y) + std::numbers::pi);
  return out;
}

QuantizedPhase quantize_phase(const PhaseMap& phase, int bits) {
  if (bits < 1 || bits > 8) throw InvalidConfig("quantize_phase: bits must be in [1, 8]");
  QuantizedPhase q;
  q.width = phase.width;
  q.height = phase.height;
  q.pitch_m = phase.pitch_m;
  q.bits = bits;
  const int levels = 1 << bits;
  for (const Grid& c : phase.channels) {
    std::vector<uint8_t> codes(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
      const double p = wrap_phase(c.data[i]);
      const long v = std::lround(p * levels / kTwoPi);
      codes[i] = static_cast<uint8_t>(v % levels);
    }
    q.channels.push_back(std::move(codes));
  }
  return q;
}

PhaseMap dequantize_phase(const QuantizedPhase& q) {
  PhaseMap p(q.width, q.height, q.channel_count(), q.pitch_m);
  const int levels = 1 << q.bits;
  for (int c = 0; c < q.channel_count(); ++c) {
    const std::vector<uint8_t>& codes = q.channels[c];
    if (codes.size() != static_cast<size_t>(q.width) * q.height)
      throw InvalidInput("dequantize_phase: code plane size mismatch");
    for (size_t i = 0; i < codes.size(); ++i)
      p.channels[c].data[i] = kTwoPi * codes[i] / levels;
  }
  return p;
}

void export_phase(const std::string& prefix, const QuantizedPhase& q,
                  const PhaseArtifactMeta& meta) {
  if (q.channel_count() < 1) throw InvalidInput("export_phase: no channels");
  if (static_cast<int>(meta.wavelengths_m.size()) != q.channel_count())
    throw InvalidConfig("export_phase: sidecar wavelength count must match channels");

  for (int c = 0; c < q.channel_count(); ++c)
    save_gray8_png(prefix + "_c" + std::to_string(c) + ".png", q.channels[c], q.width,
                   q.height);

  json sidecar;
  sidecar["pitch_m"] = meta.pitch_m;
  sidecar["wavelengths_m"] = meta.wavelengths_m;
  sidecar["distance_m"] = meta.distance_m;
  sidecar["gaze_xy"] = {meta.gaze_x, meta.gaze_y};
  sidecar["grating"] = meta.grating;
  sidecar["version"] = meta.version.empty() ? kVersion : meta.version;
  sidecar["width"] = q.width;
  sidecar["height"] = q.height;
  sidecar["channels"] = q.channel_count();
  sidecar["bits"] = q.bits;

  std::ofstream out(prefix + ".json");
  if (!out) throw FormatError("cannot write sidecar: " + prefix + ".json");
  out << sidecar.dump(2) << "\n";
}

ImportedPhase import_phase(const std::string& prefix_or_sidecar) {
  std::string prefix = prefix_or_sidecar;
  if (prefix.size() > 5 && prefix.substr(prefix.size() - 5) == ".json")
    prefix = prefix.substr(0, prefix.size() - 5);

  const std::string sidecar_path = prefix + ".json";
  std::ifstream in(sidecar_path);
  if (!in) throw FormatError("missing sidecar: " + sidecar_path);
  json sidecar;
  try {
    in >> sidecar;
  } catch (const json::exception& e) {
    throw FormatError("corrupt sidecar " + sidecar_path + ": " + e.what());
  }

  ImportedPhase result;
  try {
    result.meta.pitch_m = sidecar.at("pitch_m").get<double>();
    result.meta.wavelengths_m = sidecar.at("wavelengths_m").get<std::vector<double>>();
    result.meta.distance_m = sidecar.at("distance_m").get<double>();
    result.meta.gaze_x = sidecar.at("gaze_xy").at(0).get<double>();
    result.meta.gaze_y = sidecar.at("gaze_xy").at(1).get<double>();
    result.meta.grating = sidecar.at("grating").get<std::string>();
    result.meta.version = sidecar.at("version").get<std::string>();
    result.quantized.width = sidecar.at("width").get<int>();
    result.quantized.height = sidecar.at("height").get<int>();
    result.quantized.bits = sidecar.value("bits", 8);
  } catch (const json::exception& e) {
    throw FormatError("sidecar missing fields " + sidecar_path + ": " + e.what());
  }
  if (result.meta.grating != "none" && result.meta.grating != "horizontal")
    throw FormatError("sidecar has unknown grating kind: " + result.meta.grating);
  result.quantized.pitch_m = result.meta.pitch_m;

  const int channels = sidecar.at("channels").get<int>();
  if (static_cast<int>(result.meta.wavelengths_m.size()) != channels)
    throw FormatError("sidecar wavelength count does not match channels");
  for (int c = 0; c < channels; ++c) {
    int w = 0, h = 0;
    std::vector<uint8_t> codes =
        load_gray8_png(prefix + "_c" + std::to_string(c) + ".png", &w, &h);
    if (w != result.quantized.width || h != result.quantized.height)
      throw FormatError("phase file dimensions disagree with sidecar for channel " +
                        std::to_string(c));
    result.quantized.channels.push_back(std::move(codes));
  }
  return result;
}

}  // namespace fovholo
