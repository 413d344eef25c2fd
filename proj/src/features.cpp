#include "sid/features.hpp"

#include <cmath>
#include <fstream>

#include "sid/errors.hpp"
#include "sid/fft.hpp"
#include "sid/kernels.hpp"

namespace sid::features {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
constexpr double kLogFloor = 1e-10;
}  // namespace

double mel(double f_hz) { return 2595.0 * std::log10(1.0 + f_hz / 700.0); }

double mel_inv(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

void MfccConfig::validate(std::size_t frame_len) const {
  if (n_mel_filters < 1) throw ConfigError("need at least one mel filter");
  if (n_ceps < 1 || n_ceps > n_mel_filters)
    throw ConfigError("n_ceps must be in [1, n_mel_filters]");
  if (fft_size < frame_len) throw ConfigError("fft_size smaller than frame");
  if (band_low_hz < 0.0 || band_low_hz >= band_high_hz)
    throw ConfigError("filterbank span must satisfy 0 <= low < high");
  if (delta_window < 1) throw ConfigError("delta_window must be >= 1");
}

MfccConfig band_mfcc_config(double low_hz, double high_hz, int sample_rate) {
  const double nyq = sample_rate / 2.0;
  const double full_width = mel(nyq) - mel(0.0);
  const double band_width = mel(high_hz) - mel(low_hz);
  MfccConfig c;
  c.n_mel_filters =
      std::max(8, static_cast<int>(std::lround(26.0 * band_width / full_width)));
  c.n_ceps = std::min(13, c.n_mel_filters);
  c.band_low_hz = low_hz;
  c.band_high_hz = high_hz;
  return c;
}

std::vector<double> mel_filterbank_energies(const double* frame,
                                            std::size_t len, int sample_rate,
                                            const MfccConfig& config) {
  config.validate(len);
  const std::vector<double> mag =
      dsp::magnitude_spectrum(frame, len, config.fft_size);
  const int F = config.n_mel_filters;

  // F+2 mel-spaced breakpoints over the band span; triangles are linear in
  // mel so adjacent filters sum to one across the interior.
  std::vector<double> mel_pts(F + 2);
  const double m_lo = mel(config.band_low_hz);
  const double m_hi = mel(config.band_high_hz);
  for (int i = 0; i < F + 2; ++i)
    mel_pts[i] = m_lo + (m_hi - m_lo) * i / (F + 1);

  std::vector<double> energies(F, 0.0);
  const double bin_hz = static_cast<double>(sample_rate) / config.fft_size;
  for (std::size_t k = 0; k < mag.size(); ++k) {
    const double mk = mel(k * bin_hz);
    if (mk <= mel_pts.front() || mk >= mel_pts.back()) continue;
    for (int f = 0; f < F; ++f) {
      double w = 0.0;
      if (mk > mel_pts[f] && mk < mel_pts[f + 1])
        w = (mk - mel_pts[f]) / (mel_pts[f + 1] - mel_pts[f]);
      else if (mk == mel_pts[f + 1])
        w = 1.0;
      else if (mk > mel_pts[f + 1] && mk < mel_pts[f + 2])
        w = (mel_pts[f + 2] - mk) / (mel_pts[f + 2] - mel_pts[f + 1]);
      if (w > 0.0) energies[f] += w * mag[k];
    }
  }
  return energies;
}

FeatureSequence compute_mfcc(const dsp::FramedSignal& framed,
                             const MfccConfig& config) {
  if (framed.frames.rows() == 0) throw ConfigError("empty framed signal");
  config.validate(framed.frames.cols());
  const std::size_t T = framed.frames.rows();
  const int F = config.n_mel_filters;
  const int C = config.n_ceps;

  // orthonormal DCT-II basis
  Matrix dct(C, F);
  for (int n = 0; n < C; ++n) {
    const double scale = n == 0 ? std::sqrt(1.0 / F) : std::sqrt(2.0 / F);
    for (int f = 0; f < F; ++f)
      dct(n, f) = scale * std::cos(kPi * n * (f + 0.5) / F);
  }

  FeatureSequence out(T, C);
  std::vector<double> logs(F);
  for (std::size_t t = 0; t < T; ++t) {
    const double* frame = framed.frames.row(t);
    const std::vector<double> energies = mel_filterbank_energies(
        frame, framed.frames.cols(), framed.sample_rate, config);
    for (int f = 0; f < F; ++f)
      logs[f] = std::log(std::max(energies[f], kLogFloor));
    for (int n = 0; n < C; ++n)
      out(t, n) = kernels::dot(dct.row(n), logs.data(), F);
    if (config.include_log_energy) {
      const double e = kernels::sumsq(frame, framed.frames.cols());
      out(t, 0) = std::log(std::max(e, kLogFloor));
    }
  }
  return out;
}

FeatureSequence append_deltas(const FeatureSequence& features,
                              int delta_window) {
  if (delta_window < 1) throw ConfigError("delta_window must be >= 1");
  const std::size_t T = features.rows();
  const std::size_t D = features.cols();
  if (static_cast<int>(T) < 2 * delta_window + 1)
    throw DeltaError("sequence shorter than 2*delta_window + 1 frames");

  auto regress = [&](const Matrix& x) {
    Matrix d(T, D);
    double denom = 0.0;
    for (int k = 1; k <= delta_window; ++k) denom += 2.0 * k * k;
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < D; ++j) {
        double num = 0.0;
        for (int k = 1; k <= delta_window; ++k) {
          const std::size_t tp = std::min(T - 1, t + k);
          const std::size_t tm = t >= static_cast<std::size_t>(k) ? t - k : 0;
          num += k * (x(tp, j) - x(tm, j));
        }
        d(t, j) = num / denom;
      }
    }
    return d;
  };

  const Matrix d1 = regress(features);
  const Matrix d2 = regress(d1);
  FeatureSequence out(T, 3 * D);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < D; ++j) {
      out(t, j) = features(t, j);
      out(t, D + j) = d1(t, j);
      out(t, 2 * D + j) = d2(t, j);
    }
  }
  return out;
}

std::vector<FeatureSequence> extract_band_features(
    const dsp::SubbandSet& subbands, const std::vector<MfccConfig>& configs,
    double frame_len_ms, double hop_ms) {
  if (configs.size() != subbands.band_signals.size())
    throw ConfigError("one MfccConfig required per band");
  std::vector<FeatureSequence> out;
  out.reserve(configs.size());
  for (std::size_t b = 0; b < configs.size(); ++b) {
    const dsp::FramedSignal framed =
        dsp::frame_and_window(subbands.band_signals[b], frame_len_ms, hop_ms);
    FeatureSequence f = compute_mfcc(framed, configs[b]);
    out.push_back(append_deltas(f, configs[b].delta_window));
  }
  return out;
}

void write_features_csv(const std::string& path, const FeatureSequence& f) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  for (std::size_t t = 0; t < f.rows(); ++t) {
    for (std::size_t j = 0; j < f.cols(); ++j) {
      if (j) out << ',';
      out << f(t, j);
    }
    out << '\n';
  }
}

}  // namespace sid::features
