#include "qgate/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "qgate/ingest.hpp"
#include "qgate/subparse.hpp"

namespace qgate {

namespace {

using nlohmann::json;

GaterKind gater_kind_from(const std::string& name) {
    if (name == "static") return GaterKind::Static;
    if (name == "heuristic") return GaterKind::Heuristic;
    if (name == "llm") return GaterKind::LLM;
    if (name == "scripted") return GaterKind::Scripted;
    throw Error(ErrorCode::ConfigInvalid, "unknown gater kind \"" + name + "\"");
}

std::string get_string(const json& obj, const char* key, const std::string& fallback = "") {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string())
        throw Error(ErrorCode::ConfigInvalid, std::string(key) + " must be a string");
    return obj.at(key).get<std::string>();
}

} // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text) {
    json obj;
    try {
        obj = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }
    if (!obj.is_object())
        throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    if (obj.value("schema_version", 0) != kConfigSchemaVersion)
        throw Error(ErrorCode::ConfigInvalid, "config schema_version must be 1");

    PipelineConfig cfg;
    if (!obj.contains("query") || !obj["query"].is_object())
        throw Error(ErrorCode::ConfigInvalid, "config needs a query object");
    cfg.query.id = get_string(obj["query"], "id", "query");
    cfg.query.text = get_string(obj["query"], "text");
    cfg.query.category = get_string(obj["query"], "category");
    validate(cfg.query);

    if (!obj.contains("timeline") || !obj["timeline"].is_object())
        throw Error(ErrorCode::ConfigInvalid, "config needs a timeline object");
    const json& tl = obj["timeline"];
    if (!tl.contains("duration") || !tl["duration"].is_number())
        throw Error(ErrorCode::ConfigInvalid, "timeline.duration must be a number");
    cfg.timeline.duration = tl["duration"].get<double>();
    if (tl.contains("timestamps")) {
        cfg.timeline.explicit_timestamps = tl["timestamps"].get<std::vector<double>>();
    } else if (tl.contains("fps")) {
        cfg.timeline.fps = tl["fps"].get<double>();
    } else {
        cfg.timeline.fps = 1.0; // candidate pool density default
    }

    if (obj.contains("inputs")) {
        const json& in = obj["inputs"];
        cfg.subtitles_path = get_string(in, "subtitles");
        cfg.detections_path = get_string(in, "detections");
        cfg.frame_embeddings_path = get_string(in, "frame_embeddings");
        cfg.query_embedding_path = get_string(in, "query_embedding");
        cfg.grounding_scores_path = get_string(in, "grounding_scores");
        cfg.matching_scores_path = get_string(in, "matching_scores");
        cfg.context_scores_path = get_string(in, "context_scores");
    }

    if (obj.contains("grounding")) {
        const json& g = obj["grounding"];
        if (g.contains("entities"))
            cfg.entities = g["entities"].get<std::vector<std::string>>();
        if (g.contains("relations")) {
            for (const auto& triple : g["relations"]) {
                if (!triple.is_array() || triple.size() != 3)
                    throw Error(ErrorCode::ConfigInvalid, "relations must be [subject,predicate,object]");
                auto predicate = relation_from_name(triple[1].get<std::string>());
                if (!predicate)
                    throw Error(ErrorCode::ConfigInvalid,
                                "unknown relation predicate \"" + triple[1].get<std::string>() + "\"");
                cfg.relations.push_back(Relation{triple[0].get<std::string>(), *predicate,
                                                 triple[2].get<std::string>()});
            }
        }
        cfg.relation_bonus = g.value("relation_bonus", 0.5);
        if (cfg.relation_bonus < 0.0)
            throw Error(ErrorCode::ConfigInvalid, "relation_bonus must be >= 0");
    }

    if (obj.contains("normalize")) {
        const json& n = obj["normalize"];
        cfg.normalize.temperature = n.value("tau", 0.5);
        cfg.normalize.masked = n.value("masked", true);
        cfg.normalize.scale_over_unmasked_only = n.value("scale_over_unmasked_only", false);
        if (!(cfg.normalize.temperature > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "normalize.tau must be > 0");
    }
    if (obj.contains("selection")) {
        cfg.selection.k = obj["selection"].value("k", 8);
        if (cfg.selection.k < 1)
            throw Error(ErrorCode::ConfigInvalid, "selection.k must be >= 1");
    }

    if (obj.contains("gater")) {
        const json& g = obj["gater"];
        cfg.gater = gater_kind_from(get_string(g, "kind", "heuristic"));
        if (g.contains("endpoint")) {
            const json& e = g["endpoint"];
            cfg.endpoint.base_url = get_string(e, "base_url");
            cfg.endpoint.model_name = get_string(e, "model");
            cfg.endpoint.timeout_seconds = e.value("timeout_seconds", 30.0);
            cfg.endpoint.max_retries = e.value("max_retries", 1);
            cfg.endpoint.temperature = e.value("temperature", 0.0);
        }
        if (cfg.gater == GaterKind::Scripted) {
            if (!g.contains("weights"))
                throw Error(ErrorCode::ConfigInvalid, "scripted gater needs weights");
            GatingWeights w;
            w.grounding = g["weights"].value("grounding", 0.0);
            w.matching = g["weights"].value("matching", 0.0);
            w.context = g["weights"].value("context", 0.0);
            w.source = GateSource::LLM;
            validate(w);
            cfg.scripted_weights = w;
        }
    }

    if (obj.contains("require")) {
        cfg.require_context = obj["require"].value("context", false);
        cfg.require_grounding = obj["require"].value("grounding", false);
        cfg.require_matching = obj["require"].value("matching", false);
    }

    cfg.output_path = get_string(obj, "output");
    cfg.explain = obj.value("explain", false);
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    PipelineConfig cfg = parse_pipeline_config(read_file(path));

    // input paths are relative to the config file
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (p.empty()) return;
        std::filesystem::path candidate(p);
        if (candidate.is_relative()) p = (base / candidate).string();
    };
    resolve(cfg.subtitles_path);
    resolve(cfg.detections_path);
    resolve(cfg.frame_embeddings_path);
    resolve(cfg.query_embedding_path);
    resolve(cfg.grounding_scores_path);
    resolve(cfg.matching_scores_path);
    resolve(cfg.context_scores_path);
    resolve(cfg.output_path);
    return cfg;
}

namespace {

void require_exists(const std::string& path, const char* what) {
    if (!path.empty() && !std::filesystem::exists(path))
        throw Error(ErrorCode::ConfigInvalid,
                    std::string(what) + " file does not exist: " + path);
}

ScoreVector zero_raw(StreamKind kind, std::size_t frames, const char* which,
                     std::vector<std::string>& warnings) {
    warnings.push_back(std::string(which) +
                       " stream has no inputs; contributing an all-zero raw vector");
    return make_raw(kind, std::vector<double>(frames, 0.0));
}

} // namespace

PipelineRun run_pipeline(const PipelineConfig& cfg) {
    validate(cfg.query);
    require_exists(cfg.subtitles_path, "subtitles");
    require_exists(cfg.detections_path, "detections");
    require_exists(cfg.frame_embeddings_path, "frame_embeddings");
    require_exists(cfg.query_embedding_path, "query_embedding");
    require_exists(cfg.grounding_scores_path, "grounding_scores");
    require_exists(cfg.matching_scores_path, "matching_scores");
    require_exists(cfg.context_scores_path, "context_scores");
    if (cfg.require_context && cfg.context_scores_path.empty() && cfg.subtitles_path.empty())
        throw Error(ErrorCode::ConfigInvalid, "context stream required but no inputs configured");
    if (cfg.require_grounding && cfg.grounding_scores_path.empty() && cfg.detections_path.empty())
        throw Error(ErrorCode::ConfigInvalid, "grounding stream required but no inputs configured");
    if (cfg.require_matching && cfg.matching_scores_path.empty() &&
        cfg.frame_embeddings_path.empty())
        throw Error(ErrorCode::ConfigInvalid, "matching stream required but no inputs configured");

    PipelineRun run;
    Timeline timeline =
        cfg.timeline.explicit_timestamps
            ? build_timeline(cfg.timeline.duration, *cfg.timeline.explicit_timestamps)
            : build_timeline(cfg.timeline.duration, cfg.timeline.fps.value_or(1.0));
    const std::size_t frames = timeline.size();

    // subtitle track, shared by the context stream and the prompt
    std::vector<std::optional<std::string>> aligned(frames);
    SubtitleTrack track;
    bool have_track = false;
    if (!cfg.subtitles_path.empty()) {
        try {
            track = parse_subtitle_file(cfg.subtitles_path, &run.warnings);
            have_track = true;
            aligned = align_track(track, timeline);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyTrack) throw;
            run.warnings.push_back("subtitle track is empty; context degrades to zero");
        }
    }

    // query embedding, needed by the embedding-backed streams
    EmbeddingVector query_emb;
    if (!cfg.query_embedding_path.empty())
        query_emb = ingest_query_embedding_file(cfg.query_embedding_path);

    // grounding
    if (!cfg.grounding_scores_path.empty()) {
        run.raw_grounding = scores_to_vector(
            ingest_scores_file(cfg.grounding_scores_path, &run.warnings), timeline,
            StreamKind::Grounding, &run.warnings);
    } else if (!cfg.detections_path.empty()) {
        GroundingSpec spec;
        if (!cfg.entities.empty()) {
            spec = make_grounding_spec(cfg.entities, cfg.relations);
        } else {
            ChatFn chat;
            if (!cfg.endpoint.base_url.empty()) chat = make_chat_fn(cfg.endpoint);
            spec = extract_entities(cfg.query, chat, &run.warnings);
        }
        run.raw_grounding = grounding_scores(
            spec, ingest_detections_file(cfg.detections_path, &run.warnings), timeline,
            cfg.relation_bonus, &run.warnings);
    } else {
        run.raw_grounding = zero_raw(StreamKind::Grounding, frames, "grounding", run.warnings);
    }

    // matching
    if (!cfg.matching_scores_path.empty()) {
        run.raw_matching = scores_to_vector(
            ingest_scores_file(cfg.matching_scores_path, &run.warnings), timeline,
            StreamKind::Matching, &run.warnings);
    } else if (!cfg.frame_embeddings_path.empty() && query_emb.dim() > 0) {
        auto frame_embs = embeddings_to_frames(
            ingest_embeddings_file(cfg.frame_embeddings_path, &run.warnings), timeline,
            &run.warnings);
        run.raw_matching = matching_scores(query_emb, frame_embs, &run.warnings);
    } else {
        run.raw_matching = zero_raw(StreamKind::Matching, frames, "matching", run.warnings);
    }

    // context
    if (!cfg.context_scores_path.empty()) {
        run.raw_context = scores_to_vector(
            ingest_scores_file(cfg.context_scores_path, &run.warnings), timeline,
            StreamKind::Context, &run.warnings);
    } else if (have_track && !cfg.endpoint.base_url.empty()) {
        // embed the distinct cue texts plus the query over the wire
        std::vector<std::string> texts;
        for (const auto& sub : aligned)
            if (sub && std::find(texts.begin(), texts.end(), *sub) == texts.end())
                texts.push_back(*sub);
        if (texts.empty()) {
            run.raw_context = zero_raw(StreamKind::Context, frames, "context", run.warnings);
        } else {
            std::vector<std::string> request = texts;
            request.push_back(cfg.query.text);
            std::vector<EmbeddingVector> embs = embed_texts(cfg.endpoint, request);
            std::map<std::string, EmbeddingVector> by_text;
            for (std::size_t i = 0; i < texts.size(); ++i) by_text[texts[i]] = embs[i];
            run.raw_context = context_scores(embs.back(), aligned, by_text);
        }
    } else {
        run.raw_context = zero_raw(StreamKind::Context, frames, "context", run.warnings);
    }

    // normalize per stream
    run.norm_grounding = normalize_stream(run.raw_grounding, cfg.normalize);
    run.norm_matching = normalize_stream(run.raw_matching, cfg.normalize);
    run.norm_context = normalize_stream(run.raw_context, cfg.normalize);
    for (const ScoreVector* v : {&run.norm_grounding, &run.norm_matching, &run.norm_context}) {
        bool all_zero = std::all_of(v->values.begin(), v->values.end(),
                                    [](double x) { return x == 0.0; });
        if (all_zero)
            run.warnings.push_back(std::string(stream_name(*v->stream)) +
                                   " stream normalized to all-zero (empty unmasked set)");
    }

    // gate
    switch (cfg.gater) {
    case GaterKind::Static:
        run.decision = static_gate();
        break;
    case GaterKind::Heuristic:
        run.decision = heuristic_gate(cfg.query, cfg.heuristic);
        break;
    case GaterKind::LLM: {
        EndpointConfig endpoint = endpoint_from_env(cfg.endpoint);
        ChatFn chat;
        if (!endpoint.base_url.empty()) chat = make_chat_fn(endpoint);
        if (!chat) {
            run.warnings.push_back("llm gater has no endpoint; using heuristic fallback");
            run.decision = heuristic_gate(cfg.query, cfg.heuristic);
            run.decision.weights.source = GateSource::LLMFallback;
        } else {
            run.decision = llm_gate(cfg.query, chat, cfg.heuristic, &run.warnings);
        }
        break;
    }
    case GaterKind::Scripted:
        run.decision.weights = *cfg.scripted_weights;
        run.decision.rationale = "scripted weights";
        break;
    }

    // fuse, select, render
    run.fused = fuse_scores(run.decision.weights, run.norm_grounding, run.norm_matching,
                            run.norm_context);
    std::vector<std::size_t> selected = select_top_k(run.fused, timeline, cfg.selection);
    run.result = build_prompt(selected, timeline, aligned, cfg.query, run.fused,
                              run.decision.weights);

    if (!cfg.output_path.empty()) {
        write_file(cfg.output_path, manifest_json(run.result));
        if (cfg.explain) write_file(cfg.output_path + ".explain.json", explain_json(run));
    }
    return run;
}

std::string manifest_json(const SelectionResult& result) {
    json frames = json::array();
    for (const auto& frame : result.frames) {
        json f = {{"t", frame.t}, {"mmss", frame.mmss}, {"score", frame.score}};
        if (frame.subtitle) f["subtitle"] = *frame.subtitle;
        else f["subtitle"] = nullptr;
        frames.push_back(f);
    }
    json out = {
        {"query_id", result.query_id},
        {"weights",
         {{"grounding", result.weights.grounding},
          {"matching", result.weights.matching},
          {"context", result.weights.context},
          {"source", gate_source_name(result.weights.source)}}},
        {"frames", frames},
        {"prompt_text", result.prompt_text},
    };
    return out.dump(2) + "\n";
}

SelectionResult parse_manifest(const std::string& json_text) {
    json obj;
    try {
        obj = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("manifest: ") + e.what());
    }
    SelectionResult result;
    result.query_id = obj.at("query_id").get<std::string>();
    result.weights.grounding = obj.at("weights").at("grounding").get<double>();
    result.weights.matching = obj.at("weights").at("matching").get<double>();
    result.weights.context = obj.at("weights").at("context").get<double>();
    auto source = gate_source_from_name(obj.at("weights").at("source").get<std::string>());
    if (!source)
        throw Error(ErrorCode::SchemaViolation, "manifest has an unknown weight source");
    result.weights.source = *source;
    for (const auto& f : obj.at("frames")) {
        SelectedFrame frame;
        frame.t = f.at("t").get<double>();
        frame.mmss = f.at("mmss").get<std::string>();
        frame.score = f.at("score").get<double>();
        if (f.contains("subtitle") && !f.at("subtitle").is_null())
            frame.subtitle = f.at("subtitle").get<std::string>();
        result.frames.push_back(std::move(frame));
    }
    result.prompt_text = obj.at("prompt_text").get<std::string>();
    return result;
}

namespace {

json vector_json(const ScoreVector& v) {
    return {{"stream", v.stream ? stream_name(*v.stream) : "fused"},
            {"stage", stage_name(v.stage)},
            {"values", v.values}};
}

} // namespace

std::string explain_json(const PipelineRun& run) {
    json out = {
        {"weights",
         {{"grounding", run.decision.weights.grounding},
          {"matching", run.decision.weights.matching},
          {"context", run.decision.weights.context},
          {"source", gate_source_name(run.decision.weights.source)}}},
        {"rationale", run.decision.rationale},
        {"raw_response", run.decision.raw_response},
        {"vectors",
         {{"raw_grounding", vector_json(run.raw_grounding)},
          {"raw_matching", vector_json(run.raw_matching)},
          {"raw_context", vector_json(run.raw_context)},
          {"normalized_grounding", vector_json(run.norm_grounding)},
          {"normalized_matching", vector_json(run.norm_matching)},
          {"normalized_context", vector_json(run.norm_context)},
          {"fused", vector_json(run.fused)}}},
        {"warnings", run.warnings},
    };
    return out.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
    out << content;
    if (!out)
        throw Error(ErrorCode::IoFailure, "failed writing " + path);
}

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::NonPositiveDuration:
    case ErrorCode::EmptyOrUnsortedTimestamps:
    case ErrorCode::TimestampOutOfRange:
    case ErrorCode::NegativeTimestamp:
    case ErrorCode::InvalidLevels:
        return kExitConfigInvalid;
    case ErrorCode::SchemaViolation:
    case ErrorCode::TooManyMalformedLines:
    case ErrorCode::EmptyTrack:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ZeroNormVector:
    case ErrorCode::UnknownEntityInRelation:
    case ErrorCode::MissingSubtitleEmbedding:
    case ErrorCode::NonFiniteInput:
        return kExitIngestFailure;
    case ErrorCode::AllZeroWeights:
    case ErrorCode::NonFiniteWeight:
    case ErrorCode::PersistentMalformedResponse:
    case ErrorCode::Transport:
    case ErrorCode::HttpStatus:
    case ErrorCode::Timeout:
    case ErrorCode::EmptyChoice:
    case ErrorCode::DimensionInconsistency:
        return kExitGaterFailure;
    case ErrorCode::IoFailure:
        return kExitIoFailure;
    default:
        return 1;
    }
}

} // namespace qgate
