#include "fovholo/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <tuple>

#include "fovholo/errors.hpp"

namespace fovholo {
namespace {

// One cached plan (with its own aligned buffers) per (w, h, direction).
// Data is copied through the buffers; the copy is cheap next to the transform.
struct PlanEntry {
  fftw_plan plan = nullptr;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;

  ~PlanEntry() {
    if (plan) fftw_destroy_plan(plan);
    if (in) fftw_free(in);
    if (out) fftw_free(out);
  }
};

std::mutex g_mutex;
std::map<std::tuple<int, int, int>, PlanEntry>& plan_cache() {
  static std::map<std::tuple<int, int, int>, PlanEntry> cache;
  return cache;
}

CGrid transform(const CGrid& in, int sign) {
  if (in.width < 1 || in.height < 1) throw InvalidInput("fft2: empty grid");

  std::lock_guard<std::mutex> lock(g_mutex);
  PlanEntry& e = plan_cache()[{in.width, in.height, sign}];
  if (!e.plan) {
    const size_t n = in.size();
    e.in = fftw_alloc_complex(n);
    e.out = fftw_alloc_complex(n);
    // FFTW uses row-major (n0 = rows, n1 = cols).
    e.plan = fftw_plan_dft_2d(in.height, in.width, e.in, e.out, sign, FFTW_ESTIMATE);
  }

  std::memcpy(e.in, in.data.data(), in.size() * sizeof(fftw_complex));
  fftw_execute(e.plan);

  CGrid out(in.width, in.height);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  for (size_t i = 0; i < out.size(); ++i)
    out.data[i] = Complex(e.out[i][0] * scale, e.out[i][1] * scale);
  return out;
}

}  // namespace

CGrid fft2(const CGrid& in) { return transform(in, FFTW_FORWARD); }
CGrid ifft2(const CGrid& in) { return transform(in, FFTW_BACKWARD); }

}  // namespace fovholo
