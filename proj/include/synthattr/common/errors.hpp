#pragma once

#include <stdexcept>
#include <string>

namespace synthattr {

// Error categories map onto the CLI exit codes: ConfigError -> 2,
// DataError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

#define SYNTHATTR_DEFINE_ERROR(name, base) \
  class name : public base {               \
   public:                                 \
    using base::base;                      \
  };

// audio
SYNTHATTR_DEFINE_ERROR(NotWav, DataError)
SYNTHATTR_DEFINE_ERROR(UnsupportedEncoding, DataError)
SYNTHATTR_DEFINE_ERROR(EmptyPayload, DataError)
SYNTHATTR_DEFINE_ERROR(EmptyClip, DataError)
SYNTHATTR_DEFINE_ERROR(IoFailure, DataError)

// augment
SYNTHATTR_DEFINE_ERROR(SilentClip, DataError)
SYNTHATTR_DEFINE_ERROR(BandwidthAboveNyquist, ConfigError)

// dsp
SYNTHATTR_DEFINE_ERROR(ClipTooShort, DataError)
SYNTHATTR_DEFINE_ERROR(BadBandEdges, ConfigError)
SYNTHATTR_DEFINE_ERROR(TooFewFrames, DataError)

// nn
SYNTHATTR_DEFINE_ERROR(ShapeMismatch, DataError)
SYNTHATTR_DEFINE_ERROR(DegenerateBatch, DataError)
SYNTHATTR_DEFINE_ERROR(WindowLargerThanLength, DataError)
SYNTHATTR_DEFINE_ERROR(TargetOutOfRange, DataError)
SYNTHATTR_DEFINE_ERROR(NonFiniteGradient, NumericError)
SYNTHATTR_DEFINE_ERROR(ConfigInvalid, ConfigError)

// classical
SYNTHATTR_DEFINE_ERROR(SingleClassData, DataError)
SYNTHATTR_DEFINE_ERROR(DimensionMismatch, DataError)
SYNTHATTR_DEFINE_ERROR(TooFewSamples, DataError)

// analysis
SYNTHATTR_DEFINE_ERROR(PerplexityTooLarge, ConfigError)
SYNTHATTR_DEFINE_ERROR(SingleClass, DataError)

// pipeline
SYNTHATTR_DEFINE_ERROR(ClassTooSmall, DataError)
SYNTHATTR_DEFINE_ERROR(EmptySplit, DataError)
SYNTHATTR_DEFINE_ERROR(NonFiniteLoss, NumericError)
SYNTHATTR_DEFINE_ERROR(NonFiniteFunctionValue, NumericError)

#undef SYNTHATTR_DEFINE_ERROR

}  // namespace synthattr
