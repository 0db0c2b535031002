#include "fovholo/propagation.hpp"

#include <cmath>
#include <numbers>

#include "fovholo/errors.hpp"
#include "fovholo/fft.hpp"

namespace fovholo {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;  // fmod rounding can land exactly on 2*pi
  return w;
}

void PhaseMap::canonicalize() {
  for (Grid& c : channels)
    for (double& v : c.data) v = wrap_phase(v);
}

ComplexField field_from_phase(const Grid& phase_channel, double pitch_m) {
  if (phase_channel.width < 1 || phase_channel.height < 1)
    throw InvalidInput("field_from_phase: empty phase grid");
  if (!grid_all_finite(phase_channel))
    throw InvalidInput("field_from_phase: non-finite phase value");
  ComplexField f(phase_channel.width, phase_channel.height, pitch_m);
  for (size_t i = 0; i < phase_channel.size(); ++i) {
    const double p = phase_channel.data[i];
    f.data.data[i] = Complex(std::cos(p), std::sin(p));
  }
  return f;
}

TransferKernel fresnel_transfer(int width, int height, const PropagationConfig& cfg) {
  if (width < 2 || height < 2) throw InvalidInput("fresnel_transfer: dimensions must be >= 2");
  if (cfg.wavelength_m <= 0.0) throw InvalidConfig("fresnel_transfer: wavelength must be > 0");
  if (cfg.pitch_m <= 0.0) throw InvalidConfig("fresnel_transfer: pitch must be > 0");

  TransferKernel k;
  k.width = width;
  k.height = height;
  k.config = cfg;
  k.data = CGrid(width, height);

  // Unshifted FFT grid: fx = kx / (W * pitch) with kx in [-W/2, W/2).
  const double dfx = 1.0 / (width * cfg.pitch_m);
  const double dfy = 1.0 / (height * cfg.pitch_m);
  const double factor = -std::numbers::pi * cfg.wavelength_m * cfg.distance_m;
  for (int y = 0; y < height; ++y) {
    const int ky = (y <= height / 2 - (height % 2 == 0 ? 1 : 0)) ? y : y - height;
    const double fy = ky * dfy;
    for (int x = 0; x < width; ++x) {
      const int kx = (x <= width / 2 - (width % 2 == 0 ? 1 : 0)) ? x : x - width;
      const double fx = kx * dfx;
      const double arg = factor * (fx * fx + fy * fy);
      k.data.at(x, y) = Complex(std::cos(arg), std::sin(arg));
    }
  }
  return k;
}

ComplexField propagate(const ComplexField& field, const TransferKernel& kernel) {
  if (field.width != kernel.width || field.height != kernel.height)
    throw InvalidInput("propagate: field/kernel dimension mismatch");
  CGrid spectrum = fft2(field.data);
  for (size_t i = 0; i < spectrum.size(); ++i) spectrum.data[i] *= kernel.data.data[i];
  ComplexField out(field.width, field.height, field.pitch_m);
  out.data = ifft2(spectrum);
  return out;
}

namespace {

CGrid embed_center(const CGrid& in, int tw, int th) {
  CGrid out(tw, th);
  const int ox = (tw - in.width) / 2;
  const int oy = (th - in.height) / 2;
  for (int y = 0; y < in.height; ++y)
    for (int x = 0; x < in.width; ++x) out.at(x + ox, y + oy) = in.at(x, y);
  return out;
}

CGrid crop_center(const CGrid& in, int w, int h) {
  CGrid out(w, h);
  const int ox = (in.width - w) / 2;
  const int oy = (in.height - h) / 2;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = in.at(x + ox, y + oy);
  return out;
}

}  // namespace

Image reconstruct_intensity(const PhaseMap& phase, double distance_m,
                            const std::vector<double>& wavelengths_m, bool pad) {
  if (phase.channel_count() == 0) throw InvalidInput("reconstruct_intensity: empty phase map");
  if (static_cast<int>(wavelengths_m.size()) != phase.channel_count())
    throw InvalidConfig("reconstruct_intensity: channel/wavelength count mismatch");

  Image img(phase.width, phase.height, phase.channel_count());
  for (int c = 0; c < phase.channel_count(); ++c) {
    PropagationConfig cfg{distance_m, wavelengths_m[c], phase.pitch_m};
    ComplexField u0 = field_from_phase(phase.channels[c], phase.pitch_m);
    CGrid propagated;
    if (pad) {
      const int pw = 2 * phase.width, ph = 2 * phase.height;
      ComplexField padded(pw, ph, phase.pitch_m);
      padded.data = embed_center(u0.data, pw, ph);
      TransferKernel k = fresnel_transfer(pw, ph, cfg);
      propagated = crop_center(propagate(padded, k).data, phase.width, phase.height);
    } else {
      TransferKernel k = fresnel_transfer(phase.width, phase.height, cfg);
      propagated = propagate(u0, k).data;
    }
    Grid& out = img.channels[c];
    for (size_t i = 0; i < out.size(); ++i) {
      const Complex v = propagated.data[i];
      out.data[i] = v.real() * v.real() + v.imag() * v.imag();
    }
  }
  return img;
}

std::vector<double> default_wavelengths(int channel_count) {
  if (channel_count == 1) return {520e-9};
  if (channel_count == 3) return {638e-9, 520e-9, 450e-9};
  throw InvalidConfig("default_wavelengths: channel count must be 1 or 3");
}

}  // namespace fovholo
