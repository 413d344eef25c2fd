#ifndef SID_STORE_HPP
#define SID_STORE_HPP

#include <cstdint>
#include <string>

#include "sid/recognizer.hpp"

namespace sid::store {

// Versioned on-disk model store: one plain-text file per model plus a
// manifest listing every file with its content checksum. Floats are
// written with 17 significant digits so a reload reproduces scores
// bit-for-bit.
inline constexpr int kStoreVersion = 1;

std::uint64_t fnv1a64(const std::string& bytes);

void save_recognizer(const std::string& dir,
                     const recognizer::TrainedRecognizer& rec);

// Verifies the manifest checksums before parsing; IoError on any mismatch.
recognizer::TrainedRecognizer load_recognizer(const std::string& dir);

}  // namespace sid::store

#endif  // SID_STORE_HPP
