#include "qgate/gate.hpp"

#include <cmath>

#include <json.hpp>

#include "qgate/util.hpp"

namespace qgate {

namespace {

// Gating prompt, version 1. Keep the JSON contract stable: downstream
// parsing expects a single object with grounding/matching/context keys.
const char kGatingSystemPrompt[] = R"(You are an expert "Strategy Planner" for a video keyframe retrieval system.
Three retrieval experts score every video frame for relevance to a user query:

1. Visual Grounding: detects concrete visual entities (objects, people, colors,
   counts) inside frames. Strongest when the query names specific things to
   find or count. Blind to plot and dialogue.
2. Global Matching: measures holistic scene-level similarity between the query
   and each frame. Strongest for themes, settings, atmosphere, and broad
   actions. Weak on small details and on anything only said aloud.
3. Contextual Alignment: matches the query against time-aligned subtitles.
   Strongest for dialogue, causal explanations, and queries that reference
   what is said or mentioned. Useless when nothing relevant is spoken.

Routing rules:
- Rule A: If the query asks about concrete, countable, or attribute-level
  visual details (how many, what color, which object, where is), put the most
  weight on Visual Grounding.
- Rule B: If the query asks about the scene, theme, or atmosphere as a whole,
  put the most weight on Global Matching.
- Rule C: If the query depends on dialogue, reasons, causality, or explicitly
  anchors on subtitles, put the most weight on Contextual Alignment.
Queries often mix intents; split the weights accordingly.

Examples:
Query: "How many red cars appear in the parking lot?"
{"grounding": 0.6, "matching": 0.3, "context": 0.1, "rationale": "Counting a concrete object is a grounding task; some scene context helps."}

Query: "What is the main focus of the opening scene?"
{"grounding": 0.1, "matching": 0.7, "context": 0.2, "rationale": "A thematic scene-level question maps to global matching."}

Query: "Why does the woman leave the house after the argument?"
{"grounding": 0.1, "matching": 0.2, "context": 0.7, "rationale": "Causal plot reasoning lives in the dialogue, so contextual alignment dominates."}

Query: "When the subtitle mentions the contract, what color is the folder on the desk?"
{"grounding": 0.4, "matching": 0.1, "context": 0.5, "rationale": "Subtitle anchor for localization plus a visual attribute check."}

Respond with exactly one JSON object and nothing else:
{"grounding": x, "matching": y, "context": z, "rationale": "<one sentence>"}
where x, y, z are non-negative numbers and x + y + z = 1.)";

GatingWeights softmax_weights(double p_g, double p_m, double p_c, GateSource source) {
    // shift by the max for numerical stability
    double mx = std::max({p_g, p_m, p_c});
    double eg = std::exp(p_g - mx), em = std::exp(p_m - mx), ec = std::exp(p_c - mx);
    double z = eg + em + ec;
    GatingWeights w;
    w.grounding = eg / z;
    w.matching = em / z;
    w.context = ec / z;
    w.source = source;
    return w;
}

bool any_keyword(const std::string& lowered_query,
                 const std::vector<std::string>& keywords,
                 std::vector<std::string>* matched) {
    bool hit = false;
    for (const auto& raw_kw : keywords) {
        std::string kw = to_lower(raw_kw);
        if (!kw.empty() && lowered_query.find(kw) != std::string::npos) {
            if (matched) matched->push_back(kw);
            hit = true;
        }
    }
    return hit;
}

} // namespace

GaterDecision static_gate() {
    GaterDecision decision;
    decision.weights.grounding = 1.0 / 3.0;
    decision.weights.matching = 1.0 / 3.0;
    decision.weights.context = 1.0 / 3.0;
    decision.weights.source = GateSource::Static;
    decision.rationale = "equal weights";
    return decision;
}

GaterDecision heuristic_gate(const Query& query, const HeuristicConfig& cfg) {
    validate(query);
    std::string lowered = to_lower(query.text);

    std::vector<std::string> matched;
    double p_g = cfg.base_grounding;
    double p_m = cfg.base_matching;
    double p_c = cfg.base_context;
    // boost applies at most once per stream regardless of match count
    if (any_keyword(lowered, cfg.grounding_keywords, &matched)) p_g += cfg.boost;
    if (any_keyword(lowered, cfg.matching_keywords, &matched)) p_m += cfg.boost;
    if (any_keyword(lowered, cfg.context_keywords, &matched)) p_c += cfg.boost;

    GaterDecision decision;
    decision.weights = softmax_weights(p_g, p_m, p_c, GateSource::Heuristic);
    if (matched.empty()) {
        decision.rationale = "no keywords matched; default bias towards matching";
    } else {
        decision.rationale = "matched keywords:";
        for (const auto& kw : matched) decision.rationale += " \"" + kw + "\"";
    }
    return decision;
}

GatingWeights sanitize_weights(double grounding, double matching, double context) {
    double w[3] = {grounding, matching, context};
    double sum = 0.0;
    for (double& x : w) {
        if (!std::isfinite(x))
            throw Error(ErrorCode::NonFiniteWeight, "parsed weight is not finite");
        x = std::max(x, 0.0);
        sum += x;
    }
    if (sum <= 0.0)
        throw Error(ErrorCode::AllZeroWeights, "no positive weight after clamping");
    GatingWeights out;
    out.grounding = w[0] / sum;
    out.matching = w[1] / sum;
    out.context = w[2] / sum;
    return out;
}

const std::string& gating_system_prompt() {
    static const std::string prompt = kGatingSystemPrompt;
    return prompt;
}

std::string gating_user_prompt(const Query& query) {
    return "Query: \"" + query.text + "\"";
}

GaterDecision llm_gate(const Query& query, const ChatFn& chat,
                       const HeuristicConfig& fallback,
                       std::vector<std::string>* warnings) {
    validate(query);

    auto fall_back = [&](const std::string& reason) {
        if (warnings) warnings->push_back("llm gater: " + reason + "; using heuristic fallback");
        GaterDecision decision = heuristic_gate(query, fallback);
        decision.weights.source = GateSource::LLMFallback;
        decision.rationale = "fallback (" + reason + "); " + decision.rationale;
        return decision;
    };

    std::string last_reason = "no attempt";
    for (int attempt = 0; attempt < 2; ++attempt) { // one retry, then fall back
        std::string response;
        try {
            response = chat(gating_system_prompt(), gating_user_prompt(query));
        } catch (const std::exception& e) {
            last_reason = std::string("transport failure: ") + e.what();
            continue;
        }
        auto block = extract_first_json_object(response);
        if (!block) {
            last_reason = "no JSON object in response";
            continue;
        }
        try {
            nlohmann::json parsed = nlohmann::json::parse(*block);
            GatingWeights weights =
                sanitize_weights(parsed.at("grounding").get<double>(),
                                 parsed.at("matching").get<double>(),
                                 parsed.at("context").get<double>());
            weights.source = GateSource::LLM;
            GaterDecision decision;
            decision.weights = weights;
            decision.rationale = parsed.value("rationale", "");
            decision.raw_response = response;
            return decision;
        } catch (const std::exception& e) {
            last_reason = std::string("malformed weights: ") + e.what();
        }
    }
    return fall_back(last_reason);
}

} // namespace qgate
