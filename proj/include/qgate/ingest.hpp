#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qgate/core.hpp"
#include "qgate/streams.hpp"

namespace qgate {

// Line-delimited JSON ingestion. One object per line:
//   scores:      {"t": <seconds>, "score": <real>}
//   detections:  {"t": <seconds>, "entity": <text>, "conf": <real 0..1>,
//                 "box": [x1,y1,x2,y2]}
//   embeddings:  {"t": <seconds>, "vec": [<real>...]}
// Per-line violations are collected as warnings; the input is rejected with
// TooManyMalformedLines when more than 10% of non-empty lines are malformed.

struct TimedScore {
    double t = 0.0;
    double score = 0.0;
};

struct TimedEmbedding {
    double t = 0.0;
    EmbeddingVector vec;
};

std::vector<TimedScore> ingest_scores(std::string_view content,
                                      std::vector<std::string>* warnings = nullptr);
std::vector<Detection> ingest_detections(std::string_view content,
                                         std::vector<std::string>* warnings = nullptr);
std::vector<TimedEmbedding> ingest_embeddings(std::string_view content,
                                              std::vector<std::string>* warnings = nullptr);

// Single JSON object {"vec": [<real>...]}.
EmbeddingVector ingest_query_embedding(std::string_view content);

std::string read_file(const std::string& path); // IoFailure on error

std::vector<TimedScore> ingest_scores_file(const std::string& path,
                                           std::vector<std::string>* warnings = nullptr);
std::vector<Detection> ingest_detections_file(const std::string& path,
                                              std::vector<std::string>* warnings = nullptr);
std::vector<TimedEmbedding> ingest_embeddings_file(const std::string& path,
                                                   std::vector<std::string>* warnings = nullptr);
EmbeddingVector ingest_query_embedding_file(const std::string& path);

// Snaps timed scores onto the timeline (same rule as detections) into a raw
// ScoreVector; frames without an entry stay 0, collisions keep the maximum.
ScoreVector scores_to_vector(const std::vector<TimedScore>& entries,
                             const Timeline& timeline, StreamKind kind,
                             std::vector<std::string>* warnings = nullptr);

// Frame embeddings aligned to the timeline, one per frame; frames without an
// entry get an empty (zero-norm) embedding, reported as a warning.
std::vector<EmbeddingVector> embeddings_to_frames(
    const std::vector<TimedEmbedding>& entries, const Timeline& timeline,
    std::vector<std::string>* warnings = nullptr);

} // namespace qgate
