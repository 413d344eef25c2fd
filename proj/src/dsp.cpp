#include "sid/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sid/errors.hpp"
#include "sid/kernels.hpp"

namespace sid::dsp {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
}

AudioClip pre_emphasize(const AudioClip& clip, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) throw ConfigError("alpha must be in [0, 1)");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.samples.size());
  if (clip.samples.empty()) return out;
  out.samples[0] = clip.samples[0];
  for (std::size_t n = 1; n < clip.samples.size(); ++n)
    out.samples[n] = clip.samples[n] - alpha * clip.samples[n - 1];
  return out;
}

AudioClip de_emphasize(const AudioClip& clip, double alpha) {
  if (alpha < 0.0 || alpha >= 1.0) throw ConfigError("alpha must be in [0, 1)");
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.samples.size());
  if (clip.samples.empty()) return out;
  out.samples[0] = clip.samples[0];
  for (std::size_t n = 1; n < clip.samples.size(); ++n)
    out.samples[n] = clip.samples[n] + alpha * out.samples[n - 1];
  return out;
}

std::pair<std::size_t, std::size_t> detect_endpoints(const AudioClip& clip,
                                                     const EndpointParams& params) {
  const std::size_t frame_len = static_cast<std::size_t>(
      std::lround(params.frame_ms / 1000.0 * clip.sample_rate));
  if (frame_len == 0) throw ConfigError("endpoint frame too short");
  const std::size_t n_frames = clip.samples.size() / frame_len;
  if (n_frames < 3) throw FramingError("clip shorter than 3 analysis frames");

  std::vector<double> energy(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    energy[i] = kernels::sumsq(clip.samples.data() + i * frame_len, frame_len) /
                static_cast<double>(frame_len);
  }

  const double max_e = kernels::max_val(energy.data(), energy.size());
  if (max_e <= params.abs_floor) throw SilenceError("no energy in clip");

  const std::size_t nf = std::min<std::size_t>(params.noise_frames, n_frames);
  double floor = 0.0;
  for (std::size_t i = 0; i < nf; ++i) floor += energy[i];
  floor = std::max(floor / nf, params.abs_floor);
  const double thresh = floor * std::pow(10.0, params.margin_db / 10.0);

  // first and last run of `hysteresis` consecutive frames above threshold
  const int h = std::max(1, params.hysteresis);
  long onset = -1, offset_end = -1;
  int run = 0;
  for (std::size_t i = 0; i < n_frames; ++i) {
    if (energy[i] >= thresh) {
      if (++run >= h && onset < 0) onset = static_cast<long>(i) - (h - 1);
    } else {
      run = 0;
    }
  }
  run = 0;
  for (std::size_t ri = n_frames; ri-- > 0;) {
    if (energy[ri] >= thresh) {
      if (++run >= h) {
        offset_end = static_cast<long>(ri) + (h - 1);
        break;
      }
    } else {
      run = 0;
    }
  }

  if (onset < 0 || offset_end < 0) {
    // Nothing clears the margin. If the floor itself is far above silence
    // the clip is speech throughout; otherwise there is nothing to find.
    if (floor > params.abs_floor * 10.0) return {0, clip.samples.size()};
    throw SilenceError("no frame exceeds the energy threshold");
  }

  const std::size_t start = static_cast<std::size_t>(onset) * frame_len;
  const std::size_t end =
      std::min((static_cast<std::size_t>(offset_end) + 1) * frame_len,
               clip.samples.size());
  return {start, end};
}

std::vector<double> hamming_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t n = 0; n < len; ++n)
    w[n] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(n) /
                                  static_cast<double>(len - 1));
  return w;
}

FramedSignal frame_and_window(const AudioClip& clip, double frame_len_ms,
                              double hop_ms) {
  const std::size_t L = static_cast<std::size_t>(
      std::lround(frame_len_ms / 1000.0 * clip.sample_rate));
  const std::size_t hop = static_cast<std::size_t>(
      std::lround(hop_ms / 1000.0 * clip.sample_rate));
  if (L < 2) throw ConfigError("frame length must be at least 2 samples");
  if (hop < 1) throw ConfigError("hop must be at least 1 sample");
  const std::size_t N = clip.samples.size();
  if (N < L) throw FramingError("clip shorter than one frame");

  const std::size_t T = (N - L) / hop + 1;
  FramedSignal out;
  out.frame_len_ms = frame_len_ms;
  out.hop_ms = hop_ms;
  out.sample_rate = clip.sample_rate;
  out.frames = Matrix(T, L);
  const std::vector<double> w = hamming_window(L);
  for (std::size_t t = 0; t < T; ++t) {
    kernels::mul(clip.samples.data() + t * hop, w.data(), out.frames.row(t), L);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Butterworth design
// ---------------------------------------------------------------------------

void BandPlan::validate(int sample_rate) const {
  if (bands.empty()) throw DesignError("empty band plan");
  const double nyq = sample_rate / 2.0;
  double prev_low = -1.0;
  for (const Band& b : bands) {
    if (b.low_hz < 0.0 || b.low_hz >= b.high_hz || b.high_hz > nyq)
      throw DesignError("band edges outside (0, nyquist)");
    if (b.low_hz < prev_low) throw DesignError("bands not ordered by low edge");
    prev_low = b.low_hz;
  }
}

BandPlan make_band_plan(int n_bands, int sample_rate) {
  const double nyq = sample_rate / 2.0;
  BandPlan plan;
  switch (n_bands) {
    case 1:
      plan.bands = {{0.0, nyq}};
      break;
    case 2:
      plan.bands = {{0.0, 1140.0}, {1046.0, 4000.0}};
      break;
    case 4:
      plan.bands = {{0.0, 765.0}, {400.0, 1640.0}, {1020.0, 2700.0}, {1860.0, 4000.0}};
      break;
    case 7:
      plan.bands = {{0.0, 360.0},    {330.0, 640.0},  {580.0, 950.0},
                    {860.0, 1360.0}, {1265.0, 1920.0}, {1800.0, 2700.0},
                    {2515.0, 4000.0}};
      break;
    default:
      throw ConfigError("band plans exist for 1, 2, 4 or 7 bands");
  }
  plan.validate(sample_rate);
  return plan;
}

namespace {

std::complex<double> bilinear(std::complex<double> s, double fs2) {
  return (fs2 + s) / (fs2 - s);
}

// denominator coefficients from a conjugate pole pair
void pole_pair_to_section(std::complex<double> z, BiquadSection& s) {
  s.a1 = -2.0 * z.real();
  s.a2 = std::norm(z);
}

}  // namespace

FilterCoeffs design_bandpass(double low_hz, double high_hz, int sample_rate) {
  const double nyq = sample_rate / 2.0;
  if (low_hz < 0.0 || high_hz <= low_hz || high_hz >= nyq)
    throw DesignError("edges must satisfy 0 <= low < high < nyquist");

  const double fs2 = 2.0 * sample_rate;
  FilterCoeffs out;

  if (low_hz <= 0.0) {
    // order-2 low-pass at high_hz
    const double wc = fs2 * std::tan(kPi * high_hz / sample_rate);
    const std::complex<double> proto(-std::sqrt(0.5), std::sqrt(0.5));
    const std::complex<double> zp = bilinear(wc * proto, fs2);
    BiquadSection s;
    pole_pair_to_section(zp, s);
    s.b0 = 1.0;
    s.b1 = 2.0;
    s.b2 = 1.0;
    out.sections = {s};
    const double dc = std::abs(out.response(0.0, sample_rate));
    out.sections[0].b0 /= dc;
    out.sections[0].b1 /= dc;
    out.sections[0].b2 /= dc;
    return out;
  }

  // order-2 prototype -> bandpass: four poles, two conjugate pairs
  const double w1 = fs2 * std::tan(kPi * low_hz / sample_rate);
  const double w2 = fs2 * std::tan(kPi * high_hz / sample_rate);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);

  const std::complex<double> proto(-std::sqrt(0.5), std::sqrt(0.5));
  const std::complex<double> bp = bw * proto;
  const std::complex<double> disc = std::sqrt(bp * bp - 4.0 * w0 * w0);
  const std::complex<double> s1 = 0.5 * (bp + disc);
  const std::complex<double> s2 = 0.5 * (bp - disc);

  out.sections.resize(2);
  for (int k = 0; k < 2; ++k) {
    const std::complex<double> zp = bilinear(k == 0 ? s1 : s2, fs2);
    pole_pair_to_section(zp, out.sections[k]);
    // zeros at z = +1 and z = -1: (1 - z^-2)
    out.sections[k].b0 = 1.0;
    out.sections[k].b1 = 0.0;
    out.sections[k].b2 = -1.0;
  }

  // unity gain at the digital image of the analog center frequency
  const double f_center = std::atan(w0 / fs2) * sample_rate / kPi;
  const double g = std::abs(out.response(f_center, sample_rate));
  out.sections[0].b0 /= g;
  out.sections[0].b2 /= g;
  return out;
}

double FilterCoeffs::max_pole_radius() const {
  double r = 0.0;
  for (const BiquadSection& s : sections) {
    const double disc = s.a1 * s.a1 - 4.0 * s.a2;
    if (disc < 0.0) {
      r = std::max(r, std::sqrt(s.a2));
    } else {
      const double sq = std::sqrt(disc);
      r = std::max({r, std::abs((-s.a1 + sq) / 2.0),
                    std::abs((-s.a1 - sq) / 2.0)});
    }
  }
  return r;
}

std::complex<double> FilterCoeffs::response(double freq_hz,
                                            int sample_rate) const {
  const double w = 2.0 * kPi * freq_hz / sample_rate;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const BiquadSection& s : sections) {
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  }
  return h;
}

double FilterCoeffs::gain_db(double freq_hz, int sample_rate) const {
  return 20.0 * std::log10(std::abs(response(freq_hz, sample_rate)));
}

std::string FilterCoeffs::to_csv() const {
  std::ostringstream ss;
  ss << "b0,b1,b2,a1,a2\n";
  ss.precision(17);
  for (const BiquadSection& s : sections)
    ss << s.b0 << ',' << s.b1 << ',' << s.b2 << ',' << s.a1 << ',' << s.a2
       << '\n';
  return ss.str();
}

std::vector<double> filter(const FilterCoeffs& coeffs,
                           const std::vector<double>& x) {
  std::vector<double> y = x;
  for (const BiquadSection& s : coeffs.sections) {
    double w1 = 0.0, w2 = 0.0;  // direct form II transposed state
    for (double& v : y) {
      const double in = v;
      const double outv = s.b0 * in + w1;
      w1 = s.b1 * in - s.a1 * outv + w2;
      w2 = s.b2 * in - s.a2 * outv;
      v = outv;
    }
  }
  return y;
}

std::vector<double> filtfilt(const FilterCoeffs& coeffs,
                             const std::vector<double>& x) {
  std::vector<double> y = filter(coeffs, x);
  std::reverse(y.begin(), y.end());
  y = filter(coeffs, y);
  std::reverse(y.begin(), y.end());
  return y;
}

SubbandSet decompose_subbands(const AudioClip& clip, const BandPlan& plan) {
  plan.validate(clip.sample_rate);
  const double nyq = clip.sample_rate / 2.0;
  SubbandSet out;
  out.plan = plan;
  out.band_signals.reserve(plan.bands.size());
  for (const Band& b : plan.bands) {
    AudioClip band;
    band.sample_rate = clip.sample_rate;
    if (b.low_hz <= 0.0 && b.high_hz >= nyq) {
      band.samples = clip.samples;  // full-range band: bypass
    } else {
      const FilterCoeffs coeffs =
          design_bandpass(b.low_hz, b.high_hz, clip.sample_rate);
      band.samples = filtfilt(coeffs, clip.samples);
    }
    out.band_signals.push_back(std::move(band));
  }
  return out;
}

}  // namespace sid::dsp
