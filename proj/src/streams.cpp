#include "qgate/streams.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "qgate/util.hpp"

namespace qgate {

const char* relation_name(RelationPredicate predicate) {
    switch (predicate) {
    case RelationPredicate::LeftOf: return "left-of";
    case RelationPredicate::RightOf: return "right-of";
    case RelationPredicate::Above: return "above";
    case RelationPredicate::Below: return "below";
    case RelationPredicate::Overlapping: return "overlapping";
    }
    return "?";
}

std::optional<RelationPredicate> relation_from_name(const std::string& name) {
    if (name == "left-of") return RelationPredicate::LeftOf;
    if (name == "right-of") return RelationPredicate::RightOf;
    if (name == "above") return RelationPredicate::Above;
    if (name == "below") return RelationPredicate::Below;
    if (name == "overlapping") return RelationPredicate::Overlapping;
    return std::nullopt;
}

GroundingSpec make_grounding_spec(std::vector<std::string> entities,
                                  std::vector<Relation> relations) {
    GroundingSpec spec;
    for (auto& entity : entities) {
        std::string normalized = to_lower(trim(entity));
        if (normalized.empty()) continue;
        if (std::find(spec.entities.begin(), spec.entities.end(), normalized) ==
            spec.entities.end())
            spec.entities.push_back(std::move(normalized));
    }
    if (spec.entities.empty())
        throw Error(ErrorCode::ConfigInvalid, "grounding spec needs at least one entity");

    auto known = [&](const std::string& label) {
        return std::find(spec.entities.begin(), spec.entities.end(), label) !=
               spec.entities.end();
    };
    for (auto& rel : relations) {
        Relation normalized{to_lower(trim(rel.subject)), rel.predicate,
                            to_lower(trim(rel.object))};
        if (!known(normalized.subject) || !known(normalized.object))
            throw Error(ErrorCode::UnknownEntityInRelation,
                        "relation endpoint not in entity set: " + normalized.subject +
                            " / " + normalized.object);
        spec.relations.push_back(std::move(normalized));
    }
    return spec;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim() || a.dim() == 0)
        throw Error(ErrorCode::DimensionMismatch,
                    "dims " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw Error(ErrorCode::ZeroNormVector, "cosine similarity of a zero-norm vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

ScoreVector matching_scores(const EmbeddingVector& query_emb,
                            const std::vector<EmbeddingVector>& frame_embs,
                            std::vector<std::string>* warnings) {
    std::vector<double> values;
    values.reserve(frame_embs.size());
    for (std::size_t t = 0; t < frame_embs.size(); ++t) {
        const auto& frame = frame_embs[t];
        bool zero_norm =
            std::all_of(frame.values.begin(), frame.values.end(),
                        [](double x) { return x == 0.0; });
        if (frame.dim() == 0 || zero_norm) {
            // missing frame embedding: score 0
            if (warnings)
                warnings->push_back("frame " + std::to_string(t) +
                                    ": zero-norm embedding, scored 0");
            values.push_back(0.0);
            continue;
        }
        values.push_back(cosine_similarity(query_emb, frame));
    }
    return make_raw(StreamKind::Matching, std::move(values));
}

bool relation_satisfied(const BoundingBox& subject, RelationPredicate predicate,
                        const BoundingBox& object) {
    double scx = (subject.x1 + subject.x2) / 2.0;
    double scy = (subject.y1 + subject.y2) / 2.0;
    double ocx = (object.x1 + object.x2) / 2.0;
    double ocy = (object.y1 + object.y2) / 2.0;
    switch (predicate) {
    case RelationPredicate::LeftOf: return scx < ocx;
    case RelationPredicate::RightOf: return scx > ocx;
    case RelationPredicate::Above: return scy < ocy; // y grows downward
    case RelationPredicate::Below: return scy > ocy;
    case RelationPredicate::Overlapping: {
        double w = std::min(subject.x2, object.x2) - std::max(subject.x1, object.x1);
        double h = std::min(subject.y2, object.y2) - std::max(subject.y1, object.y1);
        return w > 0.0 && h > 0.0;
    }
    }
    return false;
}

std::optional<std::size_t> snap_to_timeline(double t, const Timeline& timeline) {
    const auto& ts = timeline.timestamps;
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    std::size_t candidate;
    if (it == ts.begin()) candidate = 0;
    else if (it == ts.end()) candidate = ts.size() - 1;
    else {
        std::size_t right = static_cast<std::size_t>(it - ts.begin());
        candidate = (t - ts[right - 1] <= ts[right] - t) ? right - 1 : right;
    }

    // half the local inter-frame interval (single-frame timelines accept all)
    if (ts.size() == 1) return candidate;
    double local;
    if (candidate == 0) local = ts[1] - ts[0];
    else if (candidate == ts.size() - 1) local = ts[candidate] - ts[candidate - 1];
    else local = std::min(ts[candidate] - ts[candidate - 1], ts[candidate + 1] - ts[candidate]);
    if (std::abs(t - ts[candidate]) <= local / 2.0) return candidate;
    return std::nullopt;
}

ScoreVector grounding_scores(const GroundingSpec& spec,
                             const std::vector<Detection>& detections,
                             const Timeline& timeline, double relation_bonus,
                             std::vector<std::string>* warnings) {
    const std::size_t frame_count = timeline.size();
    std::vector<double> base(frame_count, 0.0);

    // highest-confidence box per (frame, entity), for relation checks
    std::vector<std::unordered_map<std::string, Detection>> best_box(frame_count);

    for (const auto& det : detections) {
        auto frame = snap_to_timeline(det.t, timeline);
        if (!frame) {
            if (warnings)
                warnings->push_back("detection at t=" + std::to_string(det.t) +
                                    " does not snap to any frame, discarded");
            continue;
        }
        std::string label = to_lower(trim(det.entity));
        if (std::find(spec.entities.begin(), spec.entities.end(), label) ==
            spec.entities.end())
            continue;
        base[*frame] = std::max(base[*frame], det.conf);
        auto [it, inserted] = best_box[*frame].try_emplace(label, det);
        if (!inserted && det.conf > it->second.conf) it->second = det;
    }

    std::vector<double> values(frame_count, 0.0);
    for (std::size_t t = 0; t < frame_count; ++t) {
        if (spec.relations.empty() || base[t] == 0.0) {
            values[t] = base[t];
            continue;
        }
        std::size_t satisfied = 0;
        for (const auto& rel : spec.relations) {
            auto subj = best_box[t].find(rel.subject);
            auto obj = best_box[t].find(rel.object);
            if (subj != best_box[t].end() && obj != best_box[t].end() &&
                relation_satisfied(subj->second.box, rel.predicate, obj->second.box))
                ++satisfied;
        }
        double fraction = static_cast<double>(satisfied) /
                          static_cast<double>(spec.relations.size());
        values[t] = base[t] * (1.0 + relation_bonus * fraction);
    }
    return make_raw(StreamKind::Grounding, std::move(values));
}

ScoreVector context_scores(
    const EmbeddingVector& query_emb,
    const std::vector<std::optional<std::string>>& aligned_subs,
    const std::map<std::string, EmbeddingVector>& sub_embs) {
    std::vector<double> values;
    values.reserve(aligned_subs.size());
    for (const auto& sub : aligned_subs) {
        if (!sub) {
            values.push_back(0.0); // no subtitle: exactly zero
            continue;
        }
        auto it = sub_embs.find(*sub);
        if (it == sub_embs.end())
            throw Error(ErrorCode::MissingSubtitleEmbedding,
                        "no embedding for subtitle text \"" + *sub + "\"");
        values.push_back(cosine_similarity(query_emb, it->second));
    }
    return make_raw(StreamKind::Context, std::move(values));
}

} // namespace qgate
