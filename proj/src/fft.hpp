#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace phbt::detail {

// In-place complex DFT of arbitrary length.
// forward:  X_k = sum_n x_n exp(-2 pi i k n / N)
// backward: x_n = sum_k X_k exp(+2 pi i k n / N)   (unnormalized)
void dft(std::vector<std::complex<double>>& data, bool forward);

// Smallest 2^a 3^b 5^c >= n.
std::size_t good_fft_size(std::size_t n);

}  // namespace phbt::detail
