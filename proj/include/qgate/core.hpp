#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qgate/errors.hpp"

namespace qgate {

// Ordered candidate-frame timestamps shared by all scoring streams.
struct Timeline {
    std::vector<double> timestamps; // strictly increasing, within [0, duration]
    double duration = 0.0;

    std::size_t size() const { return timestamps.size(); }
    double operator[](std::size_t i) const { return timestamps[i]; }
};

// Fixed-rate sampling: {0, 1/fps, 2/fps, ...} up to and including duration
// when exactly divisible.
Timeline build_timeline(double duration, double fps);

// Explicit mode: the list is validated (non-empty, strictly increasing,
// within [0, duration]) and passed through.
Timeline build_timeline(double duration, std::vector<double> timestamps);

// "MM:SS" with whole minutes (no hour rollover) and truncated seconds.
// MM is zero-padded to at least two digits and may exceed 59.
std::string format_timestamp(double seconds);

struct Query {
    std::string text;
    std::string id;
    std::string category; // free-form tag, used only by bench reports
};

// Throws ConfigInvalid when the text is empty after whitespace trim.
void validate(const Query& query);

// Fixed order Grounding < Matching < Context, used for deterministic
// serialization and as the weight index of the fusion step.
enum class StreamKind { Grounding, Matching, Context };

inline constexpr StreamKind kAllStreams[] = {StreamKind::Grounding,
                                             StreamKind::Matching,
                                             StreamKind::Context};

const char* stream_name(StreamKind kind);

enum class Stage { Raw, Scaled, Normalized, Fused };

const char* stage_name(Stage stage);

// One per-frame score distribution. Stage transitions only move forward
// Raw -> Scaled -> Normalized; Fused is produced only from Normalized inputs.
struct ScoreVector {
    std::optional<StreamKind> stream; // nullopt once fused
    Stage stage = Stage::Raw;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

ScoreVector make_raw(StreamKind kind, std::vector<double> values);

enum class GateSource { Static, Heuristic, LLM, LLMFallback };

const char* gate_source_name(GateSource source);
std::optional<GateSource> gate_source_from_name(const std::string& name);

// The convex weight triple over the three streams.
struct GatingWeights {
    double grounding = 0.0;
    double matching = 0.0;
    double context = 0.0;
    GateSource source = GateSource::Static;

    double operator[](StreamKind kind) const {
        switch (kind) {
        case StreamKind::Grounding: return grounding;
        case StreamKind::Matching: return matching;
        default: return context;
        }
    }
};

inline constexpr double kWeightSumTolerance = 1e-6;

// Each weight in [0,1], sum 1 +/- 1e-6. Throws NonFiniteWeight / ConfigInvalid.
void validate(const GatingWeights& weights);

struct SelectedFrame {
    double t = 0.0;         // seconds
    std::string mmss;       // format_timestamp(t)
    double score = 0.0;     // fused score
    std::optional<std::string> subtitle;
};

struct SelectionResult {
    std::string query_id;
    GatingWeights weights;
    std::vector<SelectedFrame> frames; // sorted by timestamp ascending
    std::string prompt_text;
};

} // namespace qgate
