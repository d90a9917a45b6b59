#pragma once

#include <string>
#include <vector>

#include "qgate/core.hpp"
#include "qgate/gate.hpp"
#include "qgate/streams.hpp"

namespace qgate {

// OpenAI-compatible endpoint: POST /v1/chat/completions, POST /v1/embeddings,
// bearer auth. The api key is read from QGATE_API_KEY and never leaves the
// authorization header.
struct EndpointConfig {
    std::string base_url;  // e.g. http://localhost:8080
    std::string api_key;
    std::string model_name;
    double timeout_seconds = 30.0;
    int max_retries = 1;       // on transport errors and 5xx only
    double temperature = 0.0;  // chat sampling, deterministic-leaning
    int backoff_initial_ms = 200;
};

// Fills base_url/api_key from QGATE_API_BASE / QGATE_API_KEY when unset.
EndpointConfig endpoint_from_env(EndpointConfig cfg = {});

// Process-wide cap on concurrent in-flight requests (default 4). Calls block
// until a slot frees up.
void set_max_inflight_requests(int cap);

// One chat completion; returns the first choice's message content.
// Retries transport errors and 5xx with exponential backoff up to
// max_retries; 4xx is fatal without retry.
std::string chat_complete(const EndpointConfig& cfg, const std::string& system_text,
                          const std::string& user_text);

// Embeds the texts in request order; all returned vectors must share one
// dimension (DimensionInconsistency otherwise).
std::vector<EmbeddingVector> embed_texts(const EndpointConfig& cfg,
                                         const std::vector<std::string>& texts);

ChatFn make_chat_fn(const EndpointConfig& cfg);

// Prompts the chat model for visual entities and spatial relations; on
// failure after one retry falls back to rule-based extraction. Total: the
// result always satisfies the GroundingSpec invariants.
GroundingSpec extract_entities(const Query& query, const ChatFn& chat,
                               std::vector<std::string>* warnings = nullptr);

// Rule-based fallback: lowercase tokenization, stopword and question-word
// removal, adjacent content-word bigram merging, no relations.
GroundingSpec fallback_extract_entities(const Query& query);

} // namespace qgate
