#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace subdiff::num {

// Iterative radix-2 complex FFT. Length must be a power of two.
// Twiddle factors are cached per length, so repeated transforms of the
// same size (the convolution engine's access pattern) are cheap.
void fft(std::complex<double>* data, std::size_t n, bool inverse);

inline void fft(std::vector<std::complex<double>>& v, bool inverse) {
    fft(v.data(), v.size(), inverse);
}

std::size_t next_pow2(std::size_t n);

}  // namespace subdiff::num
