#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sid/dsp.hpp"
#include "sid/errors.hpp"
#include "sid/rng.hpp"

using namespace sid;
using namespace sid::dsp;

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

AudioClip make_clip(std::vector<double> samples, int rate = 16000) {
  AudioClip c;
  c.samples = std::move(samples);
  c.sample_rate = rate;
  return c;
}

AudioClip tone(double freq, double amp, std::size_t n, int rate = 16000) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = amp * std::sin(2.0 * kPi * freq * i / rate);
  return make_clip(std::move(s), rate);
}

}  // namespace

TEST_CASE("pre-emphasis follows its recurrence") {
  const AudioClip out = pre_emphasize(make_clip({1.0, 1.0, 1.0}), 0.97);
  CHECK(out.samples[0] == doctest::Approx(1.0));
  CHECK(out.samples[1] == doctest::Approx(0.03));
  CHECK(out.samples[2] == doctest::Approx(0.03));
}

TEST_CASE("pre-emphasis with alpha zero is the identity") {
  const AudioClip in = tone(200.0, 0.5, 256);
  const AudioClip out = pre_emphasize(in, 0.0);
  for (std::size_t i = 0; i < in.samples.size(); ++i)
    CHECK(out.samples[i] == in.samples[i]);
}

TEST_CASE("constant input settles at 1 - alpha") {
  const AudioClip out = pre_emphasize(make_clip(std::vector<double>(64, 1.0)), 0.97);
  for (std::size_t i = 1; i < out.samples.size(); ++i)
    CHECK(out.samples[i] == doctest::Approx(0.03));
}

TEST_CASE("pre-emphasis inverts exactly") {
  Rng rng(5);
  std::vector<double> s(512);
  for (double& x : s) x = rng.uniform(-0.9, 0.9);
  const AudioClip in = make_clip(std::move(s));
  const AudioClip fwd = pre_emphasize(in, 0.97);
  const AudioClip back = de_emphasize(fwd, 0.97);
  for (std::size_t i = 0; i < in.samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - in.samples[i]) < 1e-12);
}

TEST_CASE("endpoints: all-zero clip is silent") {
  CHECK_THROWS_AS(detect_endpoints(make_clip(std::vector<double>(4800, 0.0))),
                  SilenceError);
}

TEST_CASE("endpoints: silence-tone-silence is trimmed to the tone") {
  std::vector<double> s(14400, 0.0);
  for (std::size_t i = 3200; i < 11200; ++i)
    s[i] = std::sin(2.0 * kPi * 500.0 * i / 16000.0);
  const auto [start, end] = detect_endpoints(make_clip(std::move(s)));
  CHECK(start >= 3000);
  CHECK(start <= 3400);
  CHECK(end >= 11000);
  CHECK(end <= 11500);
}

TEST_CASE("endpoints: an always-loud clip is returned whole") {
  const AudioClip clip = tone(440.0, 1.0, 8000);
  const auto [start, end] = detect_endpoints(clip);
  CHECK(start == 0);
  CHECK(end == clip.samples.size());
}

TEST_CASE("endpoints require at least three analysis frames") {
  CHECK_THROWS_AS(detect_endpoints(make_clip(std::vector<double>(200, 0.5))),
                  FramingError);
}

TEST_CASE("framing count and window shape") {
  // 400 samples = one 25 ms frame at 16 kHz
  const FramedSignal one = frame_and_window(tone(300.0, 0.5, 400), 25.0, 10.0);
  CHECK(one.frames.rows() == 1);
  CHECK(one.frames.cols() == 400);

  // T = floor((N - L) / hop) + 1
  for (std::size_t n : {400u, 401u, 559u, 560u, 561u, 1600u, 16000u}) {
    const FramedSignal f = frame_and_window(tone(300.0, 0.5, n), 25.0, 10.0);
    CHECK(f.frames.rows() == (n - 400) / 160 + 1);
  }
  CHECK_THROWS_AS(frame_and_window(tone(300.0, 0.5, 399), 25.0, 10.0),
                  FramingError);
}

TEST_CASE("hamming window endpoints and midpoint") {
  const std::vector<double> w = hamming_window(401);
  CHECK(w[0] == doctest::Approx(0.08));
  CHECK(w[400] == doctest::Approx(0.08));
  CHECK(w[200] == doctest::Approx(1.0));
  for (std::size_t i = 0; i < w.size(); ++i)
    CHECK(w[i] == doctest::Approx(w[w.size() - 1 - i]));
}

TEST_CASE("bandpass edges sit at -3 dB and the center near 0 dB") {
  const FilterCoeffs f = design_bandpass(1046.0, 4000.0, 16000);
  CHECK(f.gain_db(1046.0, 16000) > -3.5);
  CHECK(f.gain_db(1046.0, 16000) < -2.5);
  CHECK(f.gain_db(4000.0, 16000) > -3.5);
  CHECK(f.gain_db(4000.0, 16000) < -2.5);

  const double center = std::sqrt(1046.0 * 4000.0);
  CHECK(f.gain_db(center, 16000) > -1.0);
  CHECK(f.gain_db(center, 16000) < 0.5);
  CHECK(f.max_pole_radius() < 1.0);
}

TEST_CASE("every published band edge attenuates within tolerance") {
  for (int n_bands : {2, 4, 7}) {
    const BandPlan plan = make_band_plan(n_bands, 16000);
    REQUIRE(plan.size() == static_cast<std::size_t>(n_bands));
    for (const Band& b : plan.bands) {
      const FilterCoeffs f = design_bandpass(b.low_hz, b.high_hz, 16000);
      CHECK(f.max_pole_radius() < 1.0);
      if (b.low_hz > 0.0) {
        CHECK(f.gain_db(b.low_hz, 16000) > -3.5);
        CHECK(f.gain_db(b.low_hz, 16000) < -2.5);
      }
      CHECK(f.gain_db(b.high_hz, 16000) > -3.5);
      CHECK(f.gain_db(b.high_hz, 16000) < -2.5);
    }
  }
}

TEST_CASE("low-pass degenerate band keeps DC and rejects high frequencies") {
  const FilterCoeffs f = design_bandpass(0.0, 1140.0, 16000);
  CHECK(f.gain_db(1.0, 16000) == doctest::Approx(0.0).epsilon(0.01));
  CHECK(f.gain_db(1140.0, 16000) > -3.5);
  CHECK(f.gain_db(1140.0, 16000) < -2.5);
  CHECK(f.gain_db(4000.0, 16000) < -20.0);
}

TEST_CASE("bad edges are design errors") {
  CHECK_THROWS_AS(design_bandpass(500.0, 300.0, 16000), DesignError);
  CHECK_THROWS_AS(design_bandpass(500.0, 8000.0, 16000), DesignError);
  CHECK_THROWS_AS(design_bandpass(-5.0, 300.0, 16000), DesignError);
}

TEST_CASE("filtering is linear") {
  Rng rng(11);
  std::vector<double> x(2048), y(2048);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  for (double& v : y) v = rng.uniform(-1.0, 1.0);
  const FilterCoeffs f = design_bandpass(400.0, 1640.0, 16000);

  std::vector<double> mix(2048);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.5 * x[i] - 0.7 * y[i];
  const std::vector<double> lhs = filtfilt(f, mix);
  const std::vector<double> fx = filtfilt(f, x);
  const std::vector<double> fy = filtfilt(f, y);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double rhs = 2.5 * fx[i] - 0.7 * fy[i];
    CHECK(std::abs(lhs[i] - rhs) <=
          1e-9 * std::max(1.0, std::max(std::abs(lhs[i]), std::abs(rhs))));
  }
}

TEST_CASE("subband decomposition shapes and the overlap region") {
  const AudioClip clip = tone(1100.0, 0.5, 4000);  // inside the 2-band overlap
  const SubbandSet two = decompose_subbands(clip, make_band_plan(2, 16000));
  REQUIRE(two.band_signals.size() == 2);
  for (const AudioClip& b : two.band_signals)
    CHECK(b.samples.size() == clip.samples.size());

  // 1100 Hz lies in 0-1140 and in 1046-4000: both bands keep most of it
  auto power = [](const std::vector<double>& s) {
    double p = 0.0;
    for (double v : s) p += v * v;
    return p / s.size();
  };
  const double p_in = power(clip.samples);
  CHECK(power(two.band_signals[0].samples) > 0.25 * p_in);
  CHECK(power(two.band_signals[1].samples) > 0.25 * p_in);

  const SubbandSet seven = decompose_subbands(clip, make_band_plan(7, 16000));
  CHECK(seven.band_signals.size() == 7);
}

TEST_CASE("full-range band bypasses filtering") {
  const AudioClip clip = tone(440.0, 0.7, 1024);
  const SubbandSet one = decompose_subbands(clip, make_band_plan(1, 16000));
  REQUIRE(one.band_signals.size() == 1);
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    CHECK(one.band_signals[0].samples[i] == clip.samples[i]);
}

TEST_CASE("out-of-band tones are strongly attenuated") {
  // two octaves below the 1046-4000 band
  const AudioClip low = tone(261.0, 1.0, 8000);
  const FilterCoeffs f = design_bandpass(1046.0, 4000.0, 16000);
  const std::vector<double> filtered = filtfilt(f, low.samples);
  double p = 0.0;
  for (double v : filtered) p += v * v;
  p /= filtered.size();
  CHECK(p < 1e-3 * 0.5);  // > 30 dB down from the 0.5 input power
}

TEST_CASE("filter csv dump lists one section per row") {
  const FilterCoeffs f = design_bandpass(400.0, 1640.0, 16000);
  const std::string csv = f.to_csv();
  CHECK(csv.find("b0,b1,b2,a1,a2") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 sections
}
