#ifndef SID_DSP_HPP
#define SID_DSP_HPP

#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sid/corpus.hpp"
#include "sid/matrix.hpp"

namespace sid::dsp {

using corpus::AudioClip;

// ---------------------------------------------------------------------------
// Pre-processing
// ---------------------------------------------------------------------------

// y[0] = x[0]; y[n] = x[n] - alpha * x[n-1]. Requires 0 <= alpha < 1.
AudioClip pre_emphasize(const AudioClip& clip, double alpha);

// Exact inverse of pre_emphasize with the same alpha.
AudioClip de_emphasize(const AudioClip& clip, double alpha);

struct EndpointParams {
  double frame_ms = 10.0;     // non-overlapping energy frames
  double margin_db = 10.0;    // onset threshold above the noise floor
  int noise_frames = 5;       // frames used for the floor estimate
  int hysteresis = 3;         // consecutive frames required
  double abs_floor = 1e-8;    // mean-square power below this is silence
};

// Tightest [start, end) sample range whose short-time energy clears the
// noise floor by margin_db, with hysteresis on both edges. A clip that is
// energetic throughout (floor itself well above silence, nothing clears
// the margin) is returned whole. Throws SilenceError when no speech exists.
std::pair<std::size_t, std::size_t> detect_endpoints(const AudioClip& clip,
                                                     const EndpointParams& params = {});

struct FramedSignal {
  Matrix frames;         // T x L, Hamming windowed
  double frame_len_ms = 0.0;
  double hop_ms = 0.0;
  int sample_rate = 0;
};

// T = floor((N - L) / hop) + 1 frames, each multiplied by
// w[n] = 0.54 - 0.46 cos(2 pi n / (L - 1)).
FramedSignal frame_and_window(const AudioClip& clip, double frame_len_ms,
                              double hop_ms);

std::vector<double> hamming_window(std::size_t len);

// ---------------------------------------------------------------------------
// Sub-band decomposition
// ---------------------------------------------------------------------------

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

struct BandPlan {
  std::vector<Band> bands;  // ordered by low edge; overlaps allowed

  void validate(int sample_rate) const;
  std::size_t size() const { return bands.size(); }
};

// The experimental plans: 1 band is the full spectrum, 2/4/7 follow the
// published edges (…-1140/1046-4000 etc).
BandPlan make_band_plan(int n_bands, int sample_rate);

struct BiquadSection {
  double b0 = 0, b1 = 0, b2 = 0;  // y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2]
  double a1 = 0, a2 = 0;          //        - a1 y[n-1] - a2 y[n-2]
};

struct FilterCoeffs {
  std::vector<BiquadSection> sections;

  // Largest pole magnitude across sections; < 1 for a stable cascade.
  double max_pole_radius() const;
  std::complex<double> response(double freq_hz, int sample_rate) const;
  double gain_db(double freq_hz, int sample_rate) const;
  std::string to_csv() const;  // one section per row
};

// Butterworth bandpass (order-2 prototype, bilinear transform with
// frequency pre-warping): exactly -3 dB at both edges, unity gain at the
// (warped) center. low_hz = 0 degenerates to the order-2 low-pass.
FilterCoeffs design_bandpass(double low_hz, double high_hz, int sample_rate);

// Single-pass filtering with zero initial state.
std::vector<double> filter(const FilterCoeffs& coeffs,
                           const std::vector<double>& x);

// Zero-phase forward-backward filtering; output length equals input length.
std::vector<double> filtfilt(const FilterCoeffs& coeffs,
                             const std::vector<double>& x);

struct SubbandSet {
  std::vector<AudioClip> band_signals;  // one per plan band, same length/rate
  BandPlan plan;
};

// Zero-phase per-band filtering of the full-length clip. A single band
// spanning (0, nyquist) bypasses filtering entirely.
SubbandSet decompose_subbands(const AudioClip& clip, const BandPlan& plan);

}  // namespace sid::dsp

#endif  // SID_DSP_HPP
