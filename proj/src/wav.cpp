#include "sid/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "sid/corpus.hpp"
#include "sid/errors.hpp"

namespace sid::corpus {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

AudioClip load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t len = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) throw FormatError("truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw FormatError("short fmt chunk in " + path);
      audio_format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      sample_rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);  // chunks are word aligned
  }

  if (audio_format != 1 || bits != 16)
    throw FormatError("only 16-bit PCM supported: " + path);
  if (channels != 1) throw ChannelError("expected mono, got " +
                                        std::to_string(channels) + " channels");
  if (data == nullptr) throw FormatError("missing data chunk in " + path);
  if (sample_rate == 0) throw FormatError("zero sample rate in " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  const std::size_t n = data_len / 2;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s =
        static_cast<std::int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
    clip.samples[i] = std::clamp(s / 32767.0, -1.0, 1.0);
  }
  clip.validate();
  return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
  clip.validate();
  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_len = n * 2;

  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_u32(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_len);
  for (std::uint32_t i = 0; i < n; ++i) {
    const double x = std::clamp(clip.samples[i], -1.0, 1.0);
    const std::int16_t s = static_cast<std::int16_t>(std::lrint(x * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(s));
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write to " + path);
}

}  // namespace sid::corpus
