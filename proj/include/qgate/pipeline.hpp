#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgate/clients.hpp"
#include "qgate/core.hpp"
#include "qgate/gate.hpp"
#include "qgate/normalize.hpp"
#include "qgate/select.hpp"

namespace qgate {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kManifestSchemaVersion = 1;

enum class GaterKind { Static, Heuristic, LLM, Scripted };

struct TimelineSpec {
    double duration = 0.0;
    std::optional<double> fps;                  // fixed-rate mode
    std::optional<std::vector<double>> explicit_timestamps;
};

struct PipelineConfig {
    Query query;
    TimelineSpec timeline;

    // Input paths; a stream with no inputs contributes an all-zero raw
    // vector with a logged warning.
    std::string subtitles_path;
    std::string detections_path;
    std::string frame_embeddings_path;
    std::string query_embedding_path;
    std::string grounding_scores_path; // precomputed alternatives
    std::string matching_scores_path;
    std::string context_scores_path;

    // Grounding spec for the detection route; extracted via the LLM client
    // (with rule-based fallback) when empty and detections are present.
    std::vector<std::string> entities;
    std::vector<Relation> relations;
    double relation_bonus = 0.5;

    NormalizeConfig normalize;
    SelectionConfig selection;

    GaterKind gater = GaterKind::Heuristic;
    HeuristicConfig heuristic;
    EndpointConfig endpoint;                     // gater=llm
    std::optional<GatingWeights> scripted_weights; // gater=scripted

    // A stream explicitly required by the config must have an input.
    bool require_context = false;
    bool require_grounding = false;
    bool require_matching = false;

    std::string output_path;
    bool explain = false;
};

PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig parse_pipeline_config(const std::string& json_text);

struct PipelineRun {
    SelectionResult result;
    GaterDecision decision;
    ScoreVector raw_grounding, raw_matching, raw_context;
    ScoreVector norm_grounding, norm_matching, norm_context;
    ScoreVector fused;
    std::vector<std::string> warnings;
};

// ingest -> score -> normalize -> gate -> fuse -> top-K -> prompt. Writes the
// manifest to cfg.output_path when set; --explain additionally dumps all
// intermediate vectors and the gater rationale next to it.
PipelineRun run_pipeline(const PipelineConfig& cfg);

std::string manifest_json(const SelectionResult& result);
SelectionResult parse_manifest(const std::string& json_text);
std::string explain_json(const PipelineRun& run);

void write_file(const std::string& path, const std::string& content);

// Process exit codes per error class.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigInvalid = 2;
inline constexpr int kExitIngestFailure = 3;
inline constexpr int kExitGaterFailure = 4;
inline constexpr int kExitIoFailure = 5;

int exit_code_for(ErrorCode code);

} // namespace qgate
