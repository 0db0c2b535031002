#pragma once

#include "fovholo/grid.hpp"

namespace fovholo {

/// Unitary 2D FFT (1/sqrt(N) scaling in each direction), so that
/// ifft2(fft2(u)) == u and total energy is preserved exactly.
CGrid fft2(const CGrid& in);
CGrid ifft2(const CGrid& in);

}  // namespace fovholo
