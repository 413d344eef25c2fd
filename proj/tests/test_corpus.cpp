#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "sid/corpus.hpp"
#include "sid/errors.hpp"

using namespace sid;
using namespace sid::corpus;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sid_corpus_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("wav round trip stays within one quantization step") {
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.resize(1600);
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    clip.samples[i] = 0.9 * std::sin(2.0 * 3.14159265358979 * 440.0 * i / 16000.0);

  const std::string path = temp_path("roundtrip.wav");
  write_wav(path, clip);
  const AudioClip back = load_wav(path);
  REQUIRE(back.samples.size() == clip.samples.size());
  CHECK(back.sample_rate == 16000);
  for (std::size_t i = 0; i < clip.samples.size(); ++i)
    CHECK(std::abs(back.samples[i] - clip.samples[i]) <= 1.0 / 32768.0);
}

TEST_CASE("wav header passthrough: 1600 samples at 16 kHz") {
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.assign(1600, 0.25);
  const std::string path = temp_path("mono.wav");
  write_wav(path, clip);
  const AudioClip back = load_wav(path);
  CHECK(back.samples.size() == 1600);
  CHECK(back.sample_rate == 16000);
}

TEST_CASE("stereo wav is refused, not downmixed") {
  // hand-built 2-channel PCM file
  const std::string path = temp_path("stereo.wav");
  std::ofstream f(path, std::ios::binary);
  auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };
  f.write("RIFF", 4);
  u32(36 + 8);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  u32(16);
  u16(1);      // PCM
  u16(2);      // stereo
  u32(16000);
  u32(16000 * 4);
  u16(4);
  u16(16);
  f.write("data", 4);
  u32(8);
  u16(100); u16(200); u16(300); u16(400);
  f.close();
  CHECK_THROWS_AS(load_wav(path), ChannelError);
}

TEST_CASE("non-PCM wav raises a format error") {
  const std::string path = temp_path("float.wav");
  std::ofstream f(path, std::ios::binary);
  auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };
  f.write("RIFF", 4);
  u32(36 + 4);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  u32(16);
  u16(3);  // IEEE float
  u16(1);
  u32(16000);
  u32(16000 * 4);
  u16(4);
  u16(32);
  f.write("data", 4);
  u32(4);
  u32(0);
  f.close();
  CHECK_THROWS_AS(load_wav(path), FormatError);
}

TEST_CASE("synthetic corpus has the requested shape and distinct voices") {
  SyntheticCorpus corpus(20, 40, 1.0, 7);
  CHECK(corpus.manifest().entries.size() == 800);

  const auto& params = corpus.params();
  REQUIRE(params.size() == 20);
  std::set<long long> f0s;
  for (const SpeakerParams& p : params) {
    CHECK(p.fundamental_hz >= 90.0);
    CHECK(p.fundamental_hz <= 260.0);
    CHECK(p.resonance_hz[0] >= 300.0);
    CHECK(p.resonance_hz[2] <= 3500.0);
    f0s.insert(std::llround(p.fundamental_hz * 1e6));
  }
  CHECK(f0s.size() == 20);  // all fundamentals distinct
}

TEST_CASE("same seed reproduces identical samples; different seed does not") {
  SyntheticCorpus a(4, 2, 0.5, 7);
  SyntheticCorpus b(4, 2, 0.5, 7);
  const AudioClip& ca = a.clip(2, 1);
  const AudioClip& cb = b.clip(2, 1);
  REQUIRE(ca.samples.size() == cb.samples.size());
  for (std::size_t i = 0; i < ca.samples.size(); ++i)
    CHECK(ca.samples[i] == cb.samples[i]);

  // tables from different seeds differ in at least one fundamental
  const auto t7 = speaker_parameter_table(7, 20);
  const auto t8 = speaker_parameter_table(8, 20);
  bool any_differs = false;
  for (std::size_t s = 0; s < t7.size(); ++s)
    if (t7[s].fundamental_hz != t8[s].fundamental_hz) any_differs = true;
  CHECK(any_differs);
}

TEST_CASE("clips stay inside [-1, 1] and carry lead/tail silence") {
  SyntheticCorpus corpus(3, 2, 1.0, 11);
  const AudioClip& clip = corpus.clip(0, 0);
  clip.validate();
  CHECK(clip.samples.size() == 16000);
  // lead region is noise-only: far quieter than the word
  double lead = 0.0, mid = 0.0;
  for (int i = 0; i < 800; ++i) lead += clip.samples[i] * clip.samples[i];
  for (int i = 7000; i < 7800; ++i) mid += clip.samples[i] * clip.samples[i];
  CHECK(mid > 100.0 * lead);
}

TEST_CASE("corpus constructor rejects degenerate shapes") {
  CHECK_THROWS_AS(SyntheticCorpus(1, 10, 1.0, 3), ConfigError);
  CHECK_THROWS_AS(SyntheticCorpus(4, 1, 1.0, 3), ConfigError);
}

TEST_CASE("split follows the published protocol: 20/40 with 10 enrolled") {
  SyntheticCorpus corpus(20, 40, 0.5, 7);
  const SplitPlan plan = split_manifest(corpus.manifest(), 20, 10);
  CHECK(plan.train.size() == 200);
  CHECK(plan.test.size() == 200);
  CHECK(plan.impostor_test.size() == 400);
  CHECK(plan.enrolled_speakers.size() == 10);

  // partition: train and test clips cover exactly the enrolled utterances
  std::set<std::pair<int, int>> seen;
  for (const Utterance& u : plan.train) {
    CHECK(u.speaker_id < 10);
    CHECK(seen.insert({u.speaker_id, u.utterance_id}).second);
  }
  for (const Utterance& u : plan.test) {
    CHECK(u.speaker_id < 10);
    CHECK(seen.insert({u.speaker_id, u.utterance_id}).second);
  }
  CHECK(seen.size() == 400);
  for (const Utterance& u : plan.impostor_test) CHECK(u.speaker_id >= 10);
}

TEST_CASE("enrolling every speaker leaves no impostors") {
  SyntheticCorpus corpus(4, 3, 0.5, 7);
  const SplitPlan plan = split_manifest(corpus.manifest(), 2, 4);
  CHECK(plan.impostor_test.empty());
  CHECK(plan.enrolled_speakers.size() == 4);
}

TEST_CASE("split refuses speakers with too few utterances") {
  SyntheticCorpus corpus(4, 5, 0.5, 7);
  CHECK_THROWS_AS(split_manifest(corpus.manifest(), 20, 2), SplitError);
  CHECK_THROWS_AS(split_manifest(corpus.manifest(), 5, 2), SplitError);
}

TEST_CASE("manifest csv round trip") {
  SyntheticCorpus corpus(3, 2, 0.5, 9);
  Manifest m = corpus.manifest();
  for (auto& e : m.entries) e.path = "clips/s" + std::to_string(e.speaker_id) + ".wav";
  const std::string path = temp_path("manifest.csv");
  write_manifest_csv(path, m);
  const Manifest back = load_manifest_csv(path);
  REQUIRE(back.entries.size() == m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    CHECK(back.entries[i].speaker_id == m.entries[i].speaker_id);
    CHECK(back.entries[i].utterance_id == m.entries[i].utterance_id);
    CHECK((back.entries[i].role == m.entries[i].role));
    CHECK(back.entries[i].path == m.entries[i].path);
  }
}
