#pragma once

#include <complex>
#include <span>

namespace rabi::fft {

/// In-place unnormalized forward DFT, X_k = sum_n x_n exp(-2 pi i k n / N).
void forward(std::span<std::complex<double>> data);

}  // namespace rabi::fft
