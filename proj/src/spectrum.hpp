#pragma once

// Internal: sampled-waveform Fourier analysis shared by the core routines.

#include <vector>

#include "qfp/core.hpp"

namespace qfp::detail {

/// Full N-point coefficient set of exp(i A(t)), in FFT order (index j holds
/// c_j for j < N/2 and c_{j-N} above). Throws TruncationError when the band
/// N/4 < |n| <= N/2 carries more than `alias_tol` of the mass, i.e. when the
/// sampling is too coarse for the drive.
void drive_spectrum(const RfDrive& drive, int samples, double alias_tol, std::vector<cplx>& out);

/// c_n for n = -half_width..half_width taken from an FFT-ordered spectrum.
inline cplx spectrum_at(const std::vector<cplx>& spectrum, int n) {
  const int size = static_cast<int>(spectrum.size());
  return spectrum[static_cast<std::size_t>(n >= 0 ? n : n + size)];
}

}  // namespace qfp::detail
