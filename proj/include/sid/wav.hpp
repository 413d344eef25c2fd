#ifndef SID_WAV_HPP
#define SID_WAV_HPP

#include <string>
#include <vector>

namespace sid::corpus {

struct AudioClip;

// 16-bit signed little-endian PCM, mono. Anything else is refused: a
// non-PCM encoding raises FormatError, multi-channel raises ChannelError
// (no silent downmix).
AudioClip load_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

}  // namespace sid::corpus

#endif  // SID_WAV_HPP
