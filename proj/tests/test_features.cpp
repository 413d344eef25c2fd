#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "sid/dsp.hpp"
#include "sid/errors.hpp"
#include "sid/features.hpp"
#include "sid/fft.hpp"
#include "sid/rng.hpp"

using namespace sid;
using namespace sid::features;

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

corpus::AudioClip tone(double freq, double amp, std::size_t n, int rate = 16000) {
  corpus::AudioClip c;
  c.sample_rate = rate;
  c.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    c.samples[i] = amp * std::sin(2.0 * kPi * freq * i / rate);
  return c;
}

// naive DFT magnitude, the FFT oracle
std::vector<double> dft_magnitude(const std::vector<double>& x, std::size_t n) {
  std::vector<double> mag(n / 2 + 1, 0.0);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < x.size(); ++t)
      acc += x[t] * std::polar(1.0, -2.0 * kPi * static_cast<double>(k * t) / n);
    mag[k] = std::abs(acc);
  }
  return mag;
}

}  // namespace

TEST_CASE("mel scale fixed points") {
  CHECK(mel(0.0) == doctest::Approx(0.0));
  CHECK(mel(700.0) == doctest::Approx(781.17).epsilon(1e-5));  // 2595 log10 2
  CHECK(mel(1000.0) > mel(700.0));
  CHECK(mel_inv(mel(1234.5)) == doctest::Approx(1234.5));
}

TEST_CASE("fft matches a naive dft") {
  Rng rng(3);
  std::vector<double> x(64);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  const std::vector<double> fast = dsp::magnitude_spectrum(x.data(), x.size(), 64);
  const std::vector<double> slow = dft_magnitude(x, 64);
  REQUIRE(fast.size() == slow.size());
  for (std::size_t k = 0; k < fast.size(); ++k)
    CHECK(fast[k] == doctest::Approx(slow[k]).epsilon(1e-9));
}

TEST_CASE("mfcc output shape and determinism") {
  const dsp::FramedSignal framed = dsp::frame_and_window(tone(500, 0.5, 4000), 25, 10);
  MfccConfig cfg = band_mfcc_config(0.0, 8000.0, 16000);
  const FeatureSequence f = compute_mfcc(framed, cfg);
  CHECK(f.rows() == framed.frames.rows());
  CHECK(f.cols() == 13);
  CHECK(f.all_finite());

  // identical frames -> identical vectors
  const dsp::FramedSignal steady = dsp::frame_and_window(
      tone(500, 0.5, 800 + 400), 25, 25);  // non-overlapping, same phase per frame
  const FeatureSequence g = compute_mfcc(dsp::frame_and_window(tone(500, 0.5, 4000), 25, 10), cfg);
  for (std::size_t j = 0; j < g.cols(); ++j)
    CHECK(g(10, j) == doctest::Approx(f(10, j)));
}

TEST_CASE("all-zero frames stay finite through the log floor") {
  corpus::AudioClip silent;
  silent.sample_rate = 16000;
  silent.samples.assign(1200, 0.0);
  const dsp::FramedSignal framed = dsp::frame_and_window(silent, 25, 10);
  const MfccConfig cfg = band_mfcc_config(0.0, 8000.0, 16000);
  const FeatureSequence f = compute_mfcc(framed, cfg);
  CHECK(f.all_finite());
}

TEST_CASE("a sine at a filter center peaks that filter") {
  const MfccConfig cfg = band_mfcc_config(0.0, 8000.0, 16000);
  // center of filter k in mel space
  for (int k : {3, 8, 14, 20}) {
    const double m_lo = mel(cfg.band_low_hz);
    const double m_hi = mel(cfg.band_high_hz);
    const double center_mel = m_lo + (m_hi - m_lo) * (k + 1) / (cfg.n_mel_filters + 1);
    const double center_hz = mel_inv(center_mel);

    const dsp::FramedSignal framed =
        dsp::frame_and_window(tone(center_hz, 0.8, 800), 25, 10);
    const std::vector<double> energies = mel_filterbank_energies(
        framed.frames.row(0), framed.frames.cols(), 16000, cfg);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < energies.size(); ++i)
      if (energies[i] > energies[arg]) arg = i;
    CHECK(arg == static_cast<std::size_t>(k));
  }
}

TEST_CASE("filterbank responses sum to about one inside the band") {
  const MfccConfig cfg = band_mfcc_config(0.0, 8000.0, 16000);
  // probe with single-bin impulses in frequency: use the triangle weights
  // directly by sweeping pure tones and comparing total output to input level
  for (double f_hz : {500.0, 1000.0, 2000.0, 3000.0, 5000.0}) {
    const dsp::FramedSignal framed =
        dsp::frame_and_window(tone(f_hz, 1.0, 800), 25, 10);
    const std::vector<double> energies = mel_filterbank_energies(
        framed.frames.row(0), framed.frames.cols(), 16000, cfg);
    double total = 0.0;
    for (double e : energies) total += e;
    // reference: total spectral magnitude inside the band
    const std::vector<double> mag = dsp::magnitude_spectrum(
        framed.frames.row(0), framed.frames.cols(), cfg.fft_size);
    double ref = 0.0;
    const double bin_hz = 16000.0 / cfg.fft_size;
    for (std::size_t k = 0; k < mag.size(); ++k) {
      const double f = k * bin_hz;
      if (f > cfg.band_low_hz && f < cfg.band_high_hz) ref += mag[k];
    }
    CHECK(total >= 0.5 * ref);
    CHECK(total <= 1.5 * ref);
  }
}

TEST_CASE("deltas of a constant sequence are zero") {
  FeatureSequence f(10, 4);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t j = 0; j < 4; ++j) f(t, j) = 3.0 + j;
  const FeatureSequence out = append_deltas(f, 2);
  REQUIRE(out.cols() == 12);
  for (std::size_t t = 0; t < 10; ++t)
    for (std::size_t j = 4; j < 12; ++j) CHECK(out(t, j) == doctest::Approx(0.0));
}

TEST_CASE("deltas of a ramp are constant with zero curvature inside") {
  FeatureSequence f(12, 2);
  for (std::size_t t = 0; t < 12; ++t) {
    f(t, 0) = 0.5 * t;
    f(t, 1) = -2.0 * t;
  }
  const FeatureSequence out = append_deltas(f, 2);
  for (std::size_t t = 2; t < 10; ++t) {
    CHECK(out(t, 2) == doctest::Approx(0.5));
    CHECK(out(t, 3) == doctest::Approx(-2.0));
  }
  for (std::size_t t = 4; t < 8; ++t) {
    CHECK(out(t, 4) == doctest::Approx(0.0));
    CHECK(out(t, 5) == doctest::Approx(0.0));
  }
}

TEST_CASE("delta stacking triples the dimension; short input is refused") {
  FeatureSequence f(13, 13);
  const FeatureSequence out = append_deltas(f, 2);
  CHECK(out.cols() == 39);

  FeatureSequence tiny(4, 3);
  CHECK_THROWS_AS(append_deltas(tiny, 2), DeltaError);
}

TEST_CASE("delta regression is linear in its input") {
  Rng rng(17);
  FeatureSequence f(9, 3);
  for (double& v : f.data()) v = rng.uniform(-2.0, 2.0);
  FeatureSequence scaled = f;
  for (double& v : scaled.data()) v *= 3.5;
  const FeatureSequence a = append_deltas(f, 2);
  const FeatureSequence b = append_deltas(scaled, 2);
  for (std::size_t i = 0; i < a.data().size(); ++i)
    CHECK(b.data()[i] == doctest::Approx(3.5 * a.data()[i]));
}

TEST_CASE("per-band extraction keeps a shared frame count") {
  const corpus::AudioClip clip = tone(800.0, 0.5, 8000);
  const dsp::BandPlan plan = dsp::make_band_plan(2, 16000);
  const dsp::SubbandSet bands = dsp::decompose_subbands(clip, plan);
  std::vector<MfccConfig> cfgs;
  for (const dsp::Band& b : plan.bands)
    cfgs.push_back(band_mfcc_config(b.low_hz, b.high_hz, 16000));
  const std::vector<FeatureSequence> feats =
      extract_band_features(bands, cfgs, 25, 10);
  REQUIRE(feats.size() == 2);
  CHECK(feats[0].rows() == feats[1].rows());
  CHECK(feats[0].cols() == 3u * cfgs[0].n_ceps);
  CHECK(feats[1].cols() == 3u * cfgs[1].n_ceps);
}

TEST_CASE("single full-range band equals the wide-band chain") {
  const corpus::AudioClip clip = tone(700.0, 0.6, 6000);
  const dsp::BandPlan plan = dsp::make_band_plan(1, 16000);
  const dsp::SubbandSet bands = dsp::decompose_subbands(clip, plan);
  const MfccConfig cfg = band_mfcc_config(0.0, 8000.0, 16000);
  const std::vector<FeatureSequence> via_bands =
      extract_band_features(bands, {cfg}, 25, 10);

  const dsp::FramedSignal framed = dsp::frame_and_window(clip, 25, 10);
  FeatureSequence direct = compute_mfcc(framed, cfg);
  direct = append_deltas(direct, cfg.delta_window);

  REQUIRE(via_bands[0].rows() == direct.rows());
  for (std::size_t i = 0; i < direct.data().size(); ++i)
    CHECK(via_bands[0].data()[i] == direct.data()[i]);
}

TEST_CASE("band features barely move when energy lands two octaves away") {
  // band 2 of the 2-band plan: 1046-4000. Out-of-band tone at 261 Hz.
  const dsp::BandPlan plan = dsp::make_band_plan(2, 16000);
  const MfccConfig cfg = band_mfcc_config(1046.0, 4000.0, 16000);

  corpus::AudioClip in_band = tone(2000.0, 0.5, 8000);
  corpus::AudioClip mixed = in_band;
  for (std::size_t i = 0; i < mixed.samples.size(); ++i)
    mixed.samples[i] += 0.5 * std::sin(2.0 * kPi * 261.0 * i / 16000.0);

  auto band_energies = [&](const corpus::AudioClip& clip) {
    const dsp::SubbandSet bands = dsp::decompose_subbands(clip, plan);
    const dsp::FramedSignal framed =
        dsp::frame_and_window(bands.band_signals[1], 25, 10);
    return mel_filterbank_energies(framed.frames.row(10), framed.frames.cols(),
                                   16000, cfg);
  };
  const std::vector<double> clean = band_energies(in_band);
  const std::vector<double> dirty = band_energies(mixed);
  double clean_total = 0.0, diff_total = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    clean_total += clean[i];
    diff_total += std::abs(dirty[i] - clean[i]);
  }
  CHECK(diff_total <= 0.10 * clean_total);
}

TEST_CASE("band config scales filters with mel width") {
  const MfccConfig wide = band_mfcc_config(0.0, 8000.0, 16000);
  CHECK(wide.n_mel_filters == 26);
  CHECK(wide.n_ceps == 13);

  const MfccConfig low = band_mfcc_config(0.0, 1140.0, 16000);
  CHECK(low.n_mel_filters >= 8);
  CHECK(low.n_mel_filters < 26);
  CHECK(low.n_ceps == std::min(13, low.n_mel_filters));

  const MfccConfig narrow = band_mfcc_config(330.0, 640.0, 16000);
  CHECK(narrow.n_mel_filters == 8);  // floor kicks in
}
