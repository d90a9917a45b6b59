#include "qgate/ingest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qgate/util.hpp"

namespace qgate {

namespace {

using nlohmann::json;

double finite_number(const json& j, const char* field) {
    if (!j.is_number())
        throw Error(ErrorCode::SchemaViolation, std::string(field) + " must be a number");
    double v = j.get<double>();
    if (!std::isfinite(v))
        throw Error(ErrorCode::SchemaViolation, std::string(field) + " must be finite");
    return v;
}

double timestamp_field(const json& obj) {
    if (!obj.contains("t"))
        throw Error(ErrorCode::SchemaViolation, "missing \"t\"");
    double t = finite_number(obj.at("t"), "t");
    if (t < 0.0)
        throw Error(ErrorCode::SchemaViolation, "t must be >= 0");
    return t;
}

EmbeddingVector vec_field(const json& obj) {
    if (!obj.contains("vec") || !obj.at("vec").is_array() || obj.at("vec").empty())
        throw Error(ErrorCode::SchemaViolation, "\"vec\" must be a non-empty array");
    EmbeddingVector vec;
    vec.values.reserve(obj.at("vec").size());
    for (const auto& x : obj.at("vec"))
        vec.values.push_back(finite_number(x, "vec entry"));
    return vec;
}

// Shared JSONL walk: parse each non-empty line, collect per-line errors,
// reject the input when more than 10% of lines are malformed.
template <typename Fn>
void for_each_record(std::string_view content, std::vector<std::string>* warnings,
                     Fn&& handle_object) {
    std::size_t line_no = 0, total = 0, malformed = 0;
    std::vector<std::string> local;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t nl = content.find('\n', start);
        std::string_view raw = (nl == std::string_view::npos)
                                   ? content.substr(start)
                                   : content.substr(start, nl - start);
        ++line_no;
        std::string line = trim(raw);
        if (!line.empty()) {
            ++total;
            try {
                json obj = json::parse(line);
                if (!obj.is_object())
                    throw Error(ErrorCode::SchemaViolation, "line is not a JSON object");
                handle_object(obj);
            } catch (const Error& e) {
                ++malformed;
                local.push_back("line " + std::to_string(line_no) + ": " + e.what());
            } catch (const json::exception& e) {
                ++malformed;
                local.push_back("line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (warnings)
        warnings->insert(warnings->end(), local.begin(), local.end());
    if (total > 0 && static_cast<double>(malformed) > 0.10 * static_cast<double>(total)) {
        std::string detail = local.empty() ? "" : (" (" + local.front() + ")");
        throw Error(ErrorCode::TooManyMalformedLines,
                    std::to_string(malformed) + " of " + std::to_string(total) +
                        " lines malformed" + detail);
    }
}

} // namespace

std::vector<TimedScore> ingest_scores(std::string_view content,
                                      std::vector<std::string>* warnings) {
    std::vector<TimedScore> out;
    for_each_record(content, warnings, [&](const json& obj) {
        TimedScore entry;
        entry.t = timestamp_field(obj);
        if (!obj.contains("score"))
            throw Error(ErrorCode::SchemaViolation, "missing \"score\"");
        entry.score = finite_number(obj.at("score"), "score");
        out.push_back(entry);
    });
    return out;
}

std::vector<Detection> ingest_detections(std::string_view content,
                                         std::vector<std::string>* warnings) {
    std::vector<Detection> out;
    for_each_record(content, warnings, [&](const json& obj) {
        Detection det;
        det.t = timestamp_field(obj);
        if (!obj.contains("entity") || !obj.at("entity").is_string())
            throw Error(ErrorCode::SchemaViolation, "missing \"entity\"");
        det.entity = obj.at("entity").get<std::string>();
        if (!obj.contains("conf"))
            throw Error(ErrorCode::SchemaViolation, "missing \"conf\"");
        det.conf = finite_number(obj.at("conf"), "conf");
        if (det.conf < 0.0 || det.conf > 1.0)
            throw Error(ErrorCode::SchemaViolation, "conf outside [0,1]");
        if (!obj.contains("box") || !obj.at("box").is_array() || obj.at("box").size() != 4)
            throw Error(ErrorCode::SchemaViolation, "\"box\" must be [x1,y1,x2,y2]");
        const auto& box = obj.at("box");
        det.box = BoundingBox{finite_number(box[0], "box"), finite_number(box[1], "box"),
                              finite_number(box[2], "box"), finite_number(box[3], "box")};
        if (!(det.box.x1 < det.box.x2) || !(det.box.y1 < det.box.y2))
            throw Error(ErrorCode::SchemaViolation, "box must satisfy x1<x2, y1<y2");
        out.push_back(std::move(det));
    });
    return out;
}

std::vector<TimedEmbedding> ingest_embeddings(std::string_view content,
                                              std::vector<std::string>* warnings) {
    std::vector<TimedEmbedding> out;
    for_each_record(content, warnings, [&](const json& obj) {
        TimedEmbedding entry;
        entry.t = timestamp_field(obj);
        entry.vec = vec_field(obj);
        out.push_back(std::move(entry));
    });
    return out;
}

EmbeddingVector ingest_query_embedding(std::string_view content) {
    json obj;
    try {
        obj = json::parse(content);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaViolation,
                    std::string("query embedding: ") + e.what());
    }
    if (!obj.is_object())
        throw Error(ErrorCode::SchemaViolation, "query embedding must be a JSON object");
    return vec_field(obj);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<TimedScore> ingest_scores_file(const std::string& path,
                                           std::vector<std::string>* warnings) {
    return ingest_scores(read_file(path), warnings);
}

std::vector<Detection> ingest_detections_file(const std::string& path,
                                              std::vector<std::string>* warnings) {
    return ingest_detections(read_file(path), warnings);
}

std::vector<TimedEmbedding> ingest_embeddings_file(const std::string& path,
                                                   std::vector<std::string>* warnings) {
    return ingest_embeddings(read_file(path), warnings);
}

EmbeddingVector ingest_query_embedding_file(const std::string& path) {
    return ingest_query_embedding(read_file(path));
}

ScoreVector scores_to_vector(const std::vector<TimedScore>& entries,
                             const Timeline& timeline, StreamKind kind,
                             std::vector<std::string>* warnings) {
    std::vector<double> values(timeline.size(), 0.0);
    std::vector<bool> seen(timeline.size(), false);
    for (const auto& entry : entries) {
        auto frame = snap_to_timeline(entry.t, timeline);
        if (!frame) {
            if (warnings)
                warnings->push_back("score at t=" + std::to_string(entry.t) +
                                    " does not snap to any frame, discarded");
            continue;
        }
        values[*frame] = seen[*frame] ? std::max(values[*frame], entry.score) : entry.score;
        seen[*frame] = true;
    }
    return make_raw(kind, std::move(values));
}

std::vector<EmbeddingVector> embeddings_to_frames(
    const std::vector<TimedEmbedding>& entries, const Timeline& timeline,
    std::vector<std::string>* warnings) {
    std::vector<EmbeddingVector> frames(timeline.size());
    for (const auto& entry : entries) {
        auto frame = snap_to_timeline(entry.t, timeline);
        if (!frame) {
            if (warnings)
                warnings->push_back("embedding at t=" + std::to_string(entry.t) +
                                    " does not snap to any frame, discarded");
            continue;
        }
        frames[*frame] = entry.vec;
    }
    for (std::size_t t = 0; t < frames.size(); ++t) {
        if (frames[t].dim() == 0 && warnings)
            warnings->push_back("frame " + std::to_string(t) +
                                ": no embedding, treated as missing");
    }
    return frames;
}

} // namespace qgate
