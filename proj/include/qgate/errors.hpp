#pragma once

#include <stdexcept>
#include <string>

namespace qgate {

enum class ErrorCode {
    // core
    NonPositiveDuration,
    EmptyOrUnsortedTimestamps,
    TimestampOutOfRange,
    NegativeTimestamp,
    // subparse
    EmptyTrack,
    // streams / ingest
    DimensionMismatch,
    ZeroNormVector,
    UnknownEntityInRelation,
    MissingSubtitleEmbedding,
    SchemaViolation,
    TooManyMalformedLines,
    IoFailure,
    // normalize
    NonFiniteInput,
    LengthMismatch,
    StageViolation,
    // gate
    AllZeroWeights,
    NonFiniteWeight,
    PersistentMalformedResponse,
    // clients
    Transport,
    HttpStatus,
    Timeout,
    EmptyChoice,
    DimensionInconsistency,
    // select
    IndexOutOfRange,
    // bench
    InvalidLevels,
    // cli
    ConfigInvalid,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace qgate
