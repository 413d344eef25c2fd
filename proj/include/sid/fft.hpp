#ifndef SID_FFT_HPP
#define SID_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace sid::dsp {

// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& x);

// Magnitude spectrum of a real frame zero-padded to fft_size: bins
// 0..fft_size/2 inclusive.
std::vector<double> magnitude_spectrum(const double* frame, std::size_t len,
                                       std::size_t fft_size);

}  // namespace sid::dsp

#endif  // SID_FFT_HPP
