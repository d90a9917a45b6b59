#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qgate/core.hpp"

namespace qgate {

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

struct BoundingBox {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0; // pixels, x1<x2 and y1<y2
};

struct Detection {
    double t = 0.0;     // seconds
    std::string entity; // label text
    double conf = 0.0;  // [0,1]
    BoundingBox box;
};

enum class RelationPredicate { LeftOf, RightOf, Above, Below, Overlapping };

const char* relation_name(RelationPredicate predicate);
std::optional<RelationPredicate> relation_from_name(const std::string& name);

struct Relation {
    std::string subject;
    RelationPredicate predicate = RelationPredicate::Overlapping;
    std::string object;
};

// Entities extracted from the query plus optional spatial constraints.
// Labels are lowercase-normalized and deduplicated; relation endpoints must
// be drawn from the entity set.
struct GroundingSpec {
    std::vector<std::string> entities;
    std::vector<Relation> relations;
};

GroundingSpec make_grounding_spec(std::vector<std::string> entities,
                                  std::vector<Relation> relations = {});

// (a.b)/(|a||b|), clamped to [-1,1] to absorb rounding.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Per-frame cosine similarity against the query embedding. Zero-norm frame
// embeddings score 0 with a warning (treated as missing frames).
ScoreVector matching_scores(const EmbeddingVector& query_emb,
                            const std::vector<EmbeddingVector>& frame_embs,
                            std::vector<std::string>* warnings = nullptr);

// Center-point comparisons in image coordinates (y grows downward);
// overlapping means strictly positive intersection area.
bool relation_satisfied(const BoundingBox& subject, RelationPredicate predicate,
                        const BoundingBox& object);

// Nearest timeline index when |t - timestamps[i]| is within half the local
// inter-frame interval; nullopt otherwise.
std::optional<std::size_t> snap_to_timeline(double t, const Timeline& timeline);

// base[t] = max confidence of any spec entity detected at frame t, else 0.
// With relations present, base is scaled by (1 + bonus * satisfied fraction)
// using the highest-confidence box per entity. Detections that do not snap
// onto the timeline are discarded with a warning.
ScoreVector grounding_scores(const GroundingSpec& spec,
                             const std::vector<Detection>& detections,
                             const Timeline& timeline,
                             double relation_bonus = 0.5,
                             std::vector<std::string>* warnings = nullptr);

// Similarity of the query against the aligned subtitle text per frame;
// exactly 0 where no subtitle covers the frame.
ScoreVector context_scores(
    const EmbeddingVector& query_emb,
    const std::vector<std::optional<std::string>>& aligned_subs,
    const std::map<std::string, EmbeddingVector>& sub_embs);

} // namespace qgate
