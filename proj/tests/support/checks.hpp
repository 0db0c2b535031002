#pragma once

#include <cmath>
#include <random>

#include "fovholo/grid.hpp"

namespace fovholo::testsupport {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Grid random_grid(int w, int h, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  Grid g(w, h);
  for (double& v : g.data) v = lo + (hi - lo) * uniform01(rng);
  return g;
}

inline CGrid random_cgrid(int w, int h, std::mt19937_64& rng) {
  CGrid g(w, h);
  for (Complex& v : g.data) {
    const double re = 2.0 * uniform01(rng) - 1.0;
    const double im = 2.0 * uniform01(rng) - 1.0;
    v = Complex(re, im);
  }
  return g;
}

/// Relative error with an absolute floor: differences below atol count as 0.
inline double rel_err(double a, double b, double atol = 1e-9) {
  const double diff = std::fabs(a - b);
  if (diff <= atol) return 0.0;
  return diff / std::max(std::fabs(a), std::fabs(b));
}

struct GradCheck {
  double frac_within = 0.0;  // fraction of elements with rel err <= tol
  double worst = 0.0;
};

/// Compares an analytic gradient against central finite differences of f.
template <typename EvalFn>
GradCheck check_gradient(const Grid& analytic, Grid point, EvalFn&& f, double h, double tol,
                         double atol = 1e-9) {
  GradCheck result;
  int ok = 0;
  const int n = static_cast<int>(point.size());
  for (int i = 0; i < n; ++i) {
    const double saved = point.data[i];
    point.data[i] = saved + h;
    const double fp = f(point);
    point.data[i] = saved - h;
    const double fm = f(point);
    point.data[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    const double e = rel_err(analytic.data[i], fd, atol);
    result.worst = std::max(result.worst, e);
    if (e <= tol) ++ok;
  }
  result.frac_within = static_cast<double>(ok) / n;
  return result;
}

}  // namespace fovholo::testsupport
