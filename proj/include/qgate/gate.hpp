#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qgate/core.hpp"

namespace qgate {

struct HeuristicConfig {
    // Base potentials carry the default bias towards Global Matching.
    double base_grounding = 0.5;
    double base_matching = 1.0;
    double base_context = 0.5;
    // Added at most once per stream when any of its keywords matches.
    double boost = 1.5;
    std::vector<std::string> grounding_keywords = {
        "how many", "what color", "count", "which object", "where is"};
    std::vector<std::string> context_keywords = {
        "why", "subtitle", "say", "mention", "reason", "according to"};
    std::vector<std::string> matching_keywords = {
        "scene", "main focus", "overall", "atmosphere"};
};

struct GaterDecision {
    GatingWeights weights;
    std::string rationale;    // LLM explanation or matched keywords
    std::string raw_response; // verbatim model output, for audit logs
};

// Equal weights (1/3, 1/3, 1/3), source=Static.
GaterDecision static_gate();

// Keyword-boosted potentials through a unit-temperature softmax. Substring
// matching on the lowercased query; each stream's boost applies at most once.
GaterDecision heuristic_gate(const Query& query, const HeuristicConfig& cfg = {});

// Clamps negatives to 0 and renormalizes to sum 1. AllZeroWeights when
// nothing positive remains; NonFiniteWeight on NaN/inf input.
GatingWeights sanitize_weights(double grounding, double matching, double context);

// Chat capability: (system text, user text) -> response text. May throw.
using ChatFn = std::function<std::string(const std::string&, const std::string&)>;

// Sends the gating prompt once, parses the first JSON object in the response
// ({"grounding":..,"matching":..,"context":..}, optional "rationale"), and
// sanitizes the weights. On parse/validation/transport failure it retries
// exactly once, then falls back to heuristic_gate with source=LLMFallback.
GaterDecision llm_gate(const Query& query, const ChatFn& chat,
                       const HeuristicConfig& fallback = {},
                       std::vector<std::string>* warnings = nullptr);

// Versioned gating prompt asset (role framing, expert definitions,
// routing rules, few-shot examples, strict JSON output instruction).
inline constexpr int kGatingPromptVersion = 1;
const std::string& gating_system_prompt();
std::string gating_user_prompt(const Query& query);

} // namespace qgate
