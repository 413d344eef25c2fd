#ifndef SID_FEATURES_HPP
#define SID_FEATURES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "sid/dsp.hpp"
#include "sid/matrix.hpp"

namespace sid::features {

double mel(double f_hz);       // 2595 log10(1 + f/700)
double mel_inv(double m);

struct MfccConfig {
  int n_mel_filters = 26;
  int n_ceps = 13;
  std::size_t fft_size = 512;
  double band_low_hz = 0.0;      // filterbank span
  double band_high_hz = 8000.0;
  bool include_log_energy = false;  // replace c0 with log frame energy
  int delta_window = 2;

  void validate(std::size_t frame_len) const;
};

// Sized for one band: the full-spectrum reference uses 26 filters / 13
// cepstra; narrower bands scale the filter count with their mel width
// (minimum 8) and cap the cepstra at the filter count.
MfccConfig band_mfcc_config(double low_hz, double high_hz, int sample_rate);

// Feature matrix, one frame per row. D = 3 * n_ceps once deltas are
// appended.
using FeatureSequence = Matrix;

// Triangular mel filterbank energies for one windowed frame (no log, no
// DCT); exposed for tests and used internally by compute_mfcc.
std::vector<double> mel_filterbank_energies(const double* frame,
                                            std::size_t len, int sample_rate,
                                            const MfccConfig& config);

// Magnitude spectrum -> mel filterbank -> floored log -> DCT-II.
FeatureSequence compute_mfcc(const dsp::FramedSignal& framed,
                             const MfccConfig& config);

// Appends delta and delta-delta rows computed by regression over
// +-delta_window frames with replicated edge padding. Output D = 3 * input D.
FeatureSequence append_deltas(const FeatureSequence& features,
                              int delta_window);

// Full chain per band signal: frame, window, MFCC, deltas.
std::vector<FeatureSequence> extract_band_features(
    const dsp::SubbandSet& subbands, const std::vector<MfccConfig>& configs,
    double frame_len_ms, double hop_ms);

void write_features_csv(const std::string& path, const FeatureSequence& f);

}  // namespace sid::features

#endif  // SID_FEATURES_HPP
