#include "qgate/core.hpp"

#include <cmath>
#include <cstdio>

#include "qgate/util.hpp"

namespace qgate {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorCode::EmptyOrUnsortedTimestamps: return "EmptyOrUnsortedTimestamps";
    case ErrorCode::TimestampOutOfRange: return "TimestampOutOfRange";
    case ErrorCode::NegativeTimestamp: return "NegativeTimestamp";
    case ErrorCode::EmptyTrack: return "EmptyTrack";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroNormVector: return "ZeroNormVector";
    case ErrorCode::UnknownEntityInRelation: return "UnknownEntityInRelation";
    case ErrorCode::MissingSubtitleEmbedding: return "MissingSubtitleEmbedding";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::TooManyMalformedLines: return "TooManyMalformedLines";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::StageViolation: return "StageViolation";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::NonFiniteWeight: return "NonFiniteWeight";
    case ErrorCode::PersistentMalformedResponse: return "PersistentMalformedResponse";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::HttpStatus: return "HttpStatus";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::EmptyChoice: return "EmptyChoice";
    case ErrorCode::DimensionInconsistency: return "DimensionInconsistency";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidLevels: return "InvalidLevels";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    }
    return "UnknownError";
}

Timeline build_timeline(double duration, double fps) {
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw Error(ErrorCode::NonPositiveDuration,
                    "duration must be positive, got " + std::to_string(duration));
    if (!(fps > 0.0) || !std::isfinite(fps))
        throw Error(ErrorCode::ConfigInvalid,
                    "fps must be positive, got " + std::to_string(fps));

    Timeline timeline;
    timeline.duration = duration;
    // k/fps <= duration, with a relative guard so an exactly divisible
    // duration keeps its endpoint despite rounding.
    auto max_k = static_cast<std::size_t>(duration * fps * (1.0 + 1e-12) + 1e-9);
    timeline.timestamps.reserve(max_k + 1);
    for (std::size_t k = 0; k <= max_k; ++k) {
        double t = static_cast<double>(k) / fps;
        if (t > duration) break;
        timeline.timestamps.push_back(t);
    }
    return timeline;
}

Timeline build_timeline(double duration, std::vector<double> timestamps) {
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw Error(ErrorCode::NonPositiveDuration,
                    "duration must be positive, got " + std::to_string(duration));
    if (timestamps.empty())
        throw Error(ErrorCode::EmptyOrUnsortedTimestamps, "explicit timestamp list is empty");
    for (std::size_t i = 0; i < timestamps.size(); ++i) {
        if (!std::isfinite(timestamps[i]))
            throw Error(ErrorCode::EmptyOrUnsortedTimestamps, "non-finite timestamp");
        if (i > 0 && !(timestamps[i] > timestamps[i - 1]))
            throw Error(ErrorCode::EmptyOrUnsortedTimestamps,
                        "timestamps must be strictly increasing");
    }
    if (timestamps.front() < 0.0 || timestamps.back() > duration)
        throw Error(ErrorCode::TimestampOutOfRange,
                    "timestamps must lie within [0, duration]");

    Timeline timeline;
    timeline.duration = duration;
    timeline.timestamps = std::move(timestamps);
    return timeline;
}

std::string format_timestamp(double seconds) {
    if (seconds < 0.0 || !std::isfinite(seconds))
        throw Error(ErrorCode::NegativeTimestamp,
                    "timestamp must be non-negative, got " + std::to_string(seconds));
    auto total = static_cast<long long>(seconds); // fractional part truncated
    long long minutes = total / 60;
    long long secs = total % 60;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02lld:%02lld", minutes, secs);
    return buf;
}

void validate(const Query& query) {
    if (trim(query.text).empty())
        throw Error(ErrorCode::ConfigInvalid, "query text is empty");
}

const char* stream_name(StreamKind kind) {
    switch (kind) {
    case StreamKind::Grounding: return "grounding";
    case StreamKind::Matching: return "matching";
    case StreamKind::Context: return "context";
    }
    return "?";
}

const char* stage_name(Stage stage) {
    switch (stage) {
    case Stage::Raw: return "raw";
    case Stage::Scaled: return "scaled";
    case Stage::Normalized: return "normalized";
    case Stage::Fused: return "fused";
    }
    return "?";
}

ScoreVector make_raw(StreamKind kind, std::vector<double> values) {
    ScoreVector v;
    v.stream = kind;
    v.stage = Stage::Raw;
    v.values = std::move(values);
    return v;
}

const char* gate_source_name(GateSource source) {
    switch (source) {
    case GateSource::Static: return "static";
    case GateSource::Heuristic: return "heuristic";
    case GateSource::LLM: return "llm";
    case GateSource::LLMFallback: return "llm-fallback";
    }
    return "?";
}

std::optional<GateSource> gate_source_from_name(const std::string& name) {
    if (name == "static") return GateSource::Static;
    if (name == "heuristic") return GateSource::Heuristic;
    if (name == "llm") return GateSource::LLM;
    if (name == "llm-fallback") return GateSource::LLMFallback;
    return std::nullopt;
}

void validate(const GatingWeights& weights) {
    const double w[] = {weights.grounding, weights.matching, weights.context};
    double sum = 0.0;
    for (double x : w) {
        if (!std::isfinite(x))
            throw Error(ErrorCode::NonFiniteWeight, "gating weight is not finite");
        if (x < 0.0 || x > 1.0)
            throw Error(ErrorCode::ConfigInvalid, "gating weight outside [0,1]");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance)
        throw Error(ErrorCode::ConfigInvalid,
                    "gating weights must sum to 1, got " + std::to_string(sum));
}

} // namespace qgate
