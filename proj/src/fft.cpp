#include "sid/fft.hpp"

#include <cmath>

#include "sid/errors.hpp"

namespace sid::dsp {

void fft(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ConfigError("FFT size must be a power of two");

  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * 3.141592653589793238462643383279 / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

std::vector<double> magnitude_spectrum(const double* frame, std::size_t len,
                                       std::size_t fft_size) {
  if (fft_size < len) throw ConfigError("fft_size smaller than frame length");
  std::vector<std::complex<double>> buf(fft_size, {0.0, 0.0});
  for (std::size_t i = 0; i < len; ++i) buf[i] = {frame[i], 0.0};
  fft(buf);
  std::vector<double> mag(fft_size / 2 + 1);
  for (std::size_t k = 0; k <= fft_size / 2; ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

}  // namespace sid::dsp
