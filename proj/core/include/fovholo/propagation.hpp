#pragma once

#include <vector>

#include "fovholo/grid.hpp"

namespace fovholo {

/// 2D complex wave field sampled on the SLM pixel grid.
struct ComplexField {
  int width = 0;
  int height = 0;
  double pitch_m = 0.0;
  CGrid data;

  ComplexField() = default;
  ComplexField(int w, int h, double pitch) : width(w), height(h), pitch_m(pitch), data(w, h) {}
};

/// Per-channel grid of SLM phase values in radians, canonical range [0, 2*pi).
struct PhaseMap {
  int width = 0;
  int height = 0;
  double pitch_m = 0.0;
  std::vector<Grid> channels;

  PhaseMap() = default;
  PhaseMap(int w, int h, int channel_count, double pitch)
      : width(w), height(h), pitch_m(pitch) {
    channels.assign(channel_count, Grid(w, h));
  }

  int channel_count() const { return static_cast<int>(channels.size()); }
  /// Wraps every value into [0, 2*pi).
  void canonicalize();
};

struct PropagationConfig {
  double distance_m = 0.15;    // signed; negative propagates backwards
  double wavelength_m = 520e-9;
  double pitch_m = 8e-6;
};

/// Frequency-domain Fresnel transfer kernel, unit modulus everywhere.
struct TransferKernel {
  int width = 0;
  int height = 0;
  PropagationConfig config;
  CGrid data;
};

/// Wraps a phase value into [0, 2*pi).
double wrap_phase(double phi);

/// Unit-amplitude field u = exp(j*phi) elementwise.
ComplexField field_from_phase(const Grid& phase_channel, double pitch_m);

/// H(fx,fy) = exp(-j*pi*lambda*d*(fx^2+fy^2)) on the unshifted FFT frequency grid.
TransferKernel fresnel_transfer(int width, int height, const PropagationConfig& cfg);

/// IFFT(H . FFT(u)) with unitary FFT scaling; energy preserving.
ComplexField propagate(const ComplexField& field, const TransferKernel& kernel);

/// Per-channel |propagate(exp(j*phi_c))|^2 at the given distance.
/// With pad=true the field is zero-embedded in a 2x grid before propagation
/// and cropped back, suppressing periodic wrap-around at large distances.
Image reconstruct_intensity(const PhaseMap& phase, double distance_m,
                            const std::vector<double>& wavelengths_m, bool pad = false);

/// Default laser lines per channel count: {520 nm} or {638, 520, 450} nm.
std::vector<double> default_wavelengths(int channel_count);

inline constexpr double kDefaultPitchM = 8e-6;
inline constexpr double kDefaultDistanceM = 0.15;

}  // namespace fovholo
