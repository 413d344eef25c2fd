#ifndef SID_ERRORS_HPP
#define SID_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sid {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SID_DEFINE_ERROR(NAME)                                      \
  class NAME : public Error {                                       \
   public:                                                          \
    explicit NAME(const std::string& msg) : Error(#NAME ": " + msg) {} \
  }

SID_DEFINE_ERROR(FormatError);    // unsupported file encoding
SID_DEFINE_ERROR(ChannelError);   // multi-channel audio
SID_DEFINE_ERROR(SplitError);     // manifest cannot satisfy the split request
SID_DEFINE_ERROR(SilenceError);   // no speech found in a clip
SID_DEFINE_ERROR(FramingError);   // clip shorter than geometry allows
SID_DEFINE_ERROR(DesignError);    // filter edges outside the valid range
SID_DEFINE_ERROR(ConfigError);    // bad configuration value or schema violation
SID_DEFINE_ERROR(ShapeError);     // dimension mismatch between data and model
SID_DEFINE_ERROR(InitError);      // not enough data to seed a model
SID_DEFINE_ERROR(TrainError);     // training preconditions violated
SID_DEFINE_ERROR(FitError);       // estimation preconditions violated
SID_DEFINE_ERROR(DeltaError);     // sequence too short for delta regression
SID_DEFINE_ERROR(VoteError);      // empty decision pool
SID_DEFINE_ERROR(WeightError);    // degenerate weight inputs
SID_DEFINE_ERROR(IndexError);     // index out of range
SID_DEFINE_ERROR(MetricError);    // empty population handed to a metric
SID_DEFINE_ERROR(StateError);     // object used before it was prepared
SID_DEFINE_ERROR(IoError);        // filesystem failure or integrity mismatch

#undef SID_DEFINE_ERROR

}  // namespace sid

#endif  // SID_ERRORS_HPP
