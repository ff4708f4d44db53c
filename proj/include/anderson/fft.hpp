#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace anderson {

/// Thin wrapper over FFTW complex transforms of rank 1-3.
/// Plans are created with FFTW_ESTIMATE | FFTW_UNALIGNED under a global
/// mutex (FFTW planning is not thread-safe); execution is re-entrant.
class Fft {
public:
    /// In-place complex DFT over a row-major array with the given shape.
    /// sign = -1 forward (e^{-i}), +1 backward (e^{+i}); unnormalized.
    static void transform(std::vector<std::complex<double>>& data,
                          const std::vector<std::int64_t>& shape, int sign);
};

} // namespace anderson
