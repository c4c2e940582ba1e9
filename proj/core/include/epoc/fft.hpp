#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace epoc {

/// Smallest power of two >= n (1 for n == 0).
std::size_t next_pow2(std::size_t n);

/// In-place iterative radix-2 FFT. Size must be a power of two. The inverse
/// transform is scaled by 1/N so that ifft(fft(x)) == x.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse = false);

/// DFT of a real signal zero-padded (or truncated) to `n` points. Uses the
/// radix-2 path when `n` is a power of two and a direct O(n^2) sum otherwise.
std::vector<std::complex<double>> real_dft(std::span<const double> signal, std::size_t n);

}  // namespace epoc
