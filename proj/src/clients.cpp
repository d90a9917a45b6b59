#include "qgate/clients.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "qgate/util.hpp"

namespace qgate {

namespace {

using nlohmann::json;

// in-flight request limiter, shared by all endpoints in the process
class RequestSlots {
public:
    void set_cap(int cap) {
        std::lock_guard lock(mutex_);
        cap_ = std::max(1, cap);
        ready_.notify_all();
    }
    void acquire() {
        std::unique_lock lock(mutex_);
        ready_.wait(lock, [this] { return in_flight_ < cap_; });
        ++in_flight_;
    }
    void release() {
        std::lock_guard lock(mutex_);
        --in_flight_;
        ready_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    int cap_ = 4;
    int in_flight_ = 0;
};

RequestSlots& request_slots() {
    static RequestSlots slots;
    return slots;
}

struct SlotGuard {
    SlotGuard() { request_slots().acquire(); }
    ~SlotGuard() { request_slots().release(); }
};

EndpointConfig validated(EndpointConfig cfg) {
    if (cfg.base_url.empty())
        throw Error(ErrorCode::ConfigInvalid, "endpoint base_url is empty");
    if (!(cfg.timeout_seconds > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "endpoint timeout must be > 0");
    if (cfg.max_retries < 0)
        throw Error(ErrorCode::ConfigInvalid, "max_retries must be >= 0");
    return cfg;
}

httplib::Client make_client(const EndpointConfig& cfg) {
    httplib::Client client(cfg.base_url);
    auto timeout = std::chrono::milliseconds(
        static_cast<long long>(cfg.timeout_seconds * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    return client;
}

httplib::Headers auth_headers(const EndpointConfig& cfg) {
    httplib::Headers headers;
    if (!cfg.api_key.empty())
        headers.emplace("Authorization", "Bearer " + cfg.api_key);
    return headers;
}

// POST with retry on transport errors and 5xx; 4xx is fatal immediately.
json post_json(const EndpointConfig& cfg, const std::string& path, const json& body) {
    SlotGuard slot;
    std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            auto backoff = std::chrono::milliseconds(
                static_cast<long long>(cfg.backoff_initial_ms) << (attempt - 1));
            std::this_thread::sleep_for(backoff);
        }
        httplib::Client client = make_client(cfg);
        httplib::Result res =
            client.Post(path, auth_headers(cfg), payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            if (res.error() == httplib::Error::ConnectionTimeout ||
                res.error() == httplib::Error::Read ||
                res.error() == httplib::Error::Write) {
                // fall through to retry; final attempt reports Timeout below
                if (attempt == cfg.max_retries)
                    throw Error(ErrorCode::Timeout, path + ": " + last_error);
            }
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status >= 400)
            throw Error(ErrorCode::HttpStatus,
                        path + ": HTTP " + std::to_string(res->status));
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::Transport,
                        path + ": invalid JSON response: " + e.what());
        }
    }
    throw Error(ErrorCode::Transport, path + ": " + last_error);
}

} // namespace

void set_max_inflight_requests(int cap) { request_slots().set_cap(cap); }

EndpointConfig endpoint_from_env(EndpointConfig cfg) {
    if (cfg.base_url.empty()) {
        if (const char* base = std::getenv("QGATE_API_BASE")) cfg.base_url = base;
    }
    if (cfg.api_key.empty()) {
        if (const char* key = std::getenv("QGATE_API_KEY")) cfg.api_key = key;
    }
    return cfg;
}

std::string chat_complete(const EndpointConfig& cfg, const std::string& system_text,
                          const std::string& user_text) {
    EndpointConfig checked = validated(cfg);
    json body = {
        {"model", checked.model_name},
        {"messages",
         {{{"role", "system"}, {"content", system_text}},
          {{"role", "user"}, {"content", user_text}}}},
        {"temperature", checked.temperature},
    };
    json response = post_json(checked, "/v1/chat/completions", body);
    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty())
        throw Error(ErrorCode::EmptyChoice, "chat response has no choices");
    const json& first = response["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content"))
        throw Error(ErrorCode::EmptyChoice, "chat choice has no message content");
    return first["message"]["content"].get<std::string>();
}

std::vector<EmbeddingVector> embed_texts(const EndpointConfig& cfg,
                                         const std::vector<std::string>& texts) {
    if (texts.empty())
        throw Error(ErrorCode::ConfigInvalid, "embed_texts requires a non-empty input list");
    EndpointConfig checked = validated(cfg);
    json body = {{"model", checked.model_name}, {"input", texts}};
    json response = post_json(checked, "/v1/embeddings", body);
    if (!response.contains("data") || !response["data"].is_array())
        throw Error(ErrorCode::Transport, "embeddings response has no data array");

    // response order follows the "index" field when present
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> filled(texts.size(), false);
    std::size_t fallback_index = 0;
    for (const auto& item : response["data"]) {
        if (!item.contains("embedding") || !item["embedding"].is_array())
            throw Error(ErrorCode::Transport, "embeddings item has no embedding array");
        std::size_t index = item.contains("index")
                                ? item["index"].get<std::size_t>()
                                : fallback_index;
        ++fallback_index;
        if (index >= out.size())
            throw Error(ErrorCode::Transport, "embeddings index out of range");
        for (const auto& x : item["embedding"])
            out[index].values.push_back(x.get<double>());
        filled[index] = true;
    }
    if (!std::all_of(filled.begin(), filled.end(), [](bool b) { return b; }))
        throw Error(ErrorCode::Transport, "embeddings response is missing inputs");

    std::size_t dim = out.front().dim();
    for (const auto& vec : out)
        if (vec.dim() != dim)
            throw Error(ErrorCode::DimensionInconsistency,
                        "embedding dims differ: " + std::to_string(dim) + " vs " +
                            std::to_string(vec.dim()));
    return out;
}

ChatFn make_chat_fn(const EndpointConfig& cfg) {
    return [cfg](const std::string& system_text, const std::string& user_text) {
        return chat_complete(cfg, system_text, user_text);
    };
}

namespace {

const char kEntitySystemPrompt[] =
    R"(You extract concrete visual entities from video questions for an object detector.
Return exactly one JSON object and nothing else:
{"entities": ["<noun or short noun phrase>", ...],
 "relations": [["<subject entity>", "<predicate>", "<object entity>"], ...]}
Entities are concrete, visible things (e.g. "woman", "red car"); skip abstract
words and question vocabulary. Relations are optional spatial constraints
between listed entities; the predicate must be one of: left-of, right-of,
above, below, overlapping.)";

const std::set<std::string>& stopword_set() {
    // standard stopwords plus question vocabulary
    static const std::set<std::string> words = {
        "a", "an", "the", "is", "are", "was", "were", "be", "been", "being",
        "do", "does", "did", "of", "in", "on", "at", "to", "for", "with",
        "and", "or", "but", "as", "by", "from", "into", "after", "before",
        "it", "its", "his", "her", "their", "this", "that", "these", "those",
        "he", "she", "they", "them", "we", "you", "i", "there", "here",
        "what", "which", "who", "whom", "whose", "where", "when", "why", "how",
        "many", "much", "color", "colour", "kind", "type", "happen", "happens",
        "appear", "appears", "say", "says", "said", "mention", "mentions",
        "pass", "passes", "show", "shown", "video", "frame", "subtitle",
    };
    return words;
}

std::string strip_punct(const std::string& token) {
    std::string out;
    for (char c : token)
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'')
            out.push_back(c);
    return out;
}

} // namespace

GroundingSpec fallback_extract_entities(const Query& query) {
    const auto& stopwords = stopword_set();
    std::vector<std::string> tokens = split_whitespace(to_lower(query.text));

    // content mask over the original token sequence
    std::vector<std::string> cleaned;
    std::vector<bool> content;
    for (auto& token : tokens) {
        std::string word = strip_punct(token);
        cleaned.push_back(word);
        content.push_back(!word.empty() && !stopwords.contains(word));
    }

    // greedy non-overlapping bigram merge over adjacent content words
    std::vector<std::string> entities;
    for (std::size_t i = 0; i < cleaned.size();) {
        if (!content[i]) {
            ++i;
            continue;
        }
        if (i + 1 < cleaned.size() && content[i + 1]) {
            entities.push_back(cleaned[i] + " " + cleaned[i + 1]);
            i += 2;
        } else {
            entities.push_back(cleaned[i]);
            ++i;
        }
    }

    if (entities.empty()) {
        // degrade: keep any non-stopword token, else the whole trimmed query
        for (std::size_t i = 0; i < cleaned.size(); ++i)
            if (!cleaned[i].empty()) entities.push_back(cleaned[i]);
    }
    if (entities.empty()) entities.push_back(to_lower(trim(query.text)));

    return make_grounding_spec(std::move(entities));
}

GroundingSpec extract_entities(const Query& query, const ChatFn& chat,
                               std::vector<std::string>* warnings) {
    validate(query);
    std::string last_reason = "no attempt";
    for (int attempt = 0; attempt < 2 && chat; ++attempt) {
        std::string response;
        try {
            response = chat(kEntitySystemPrompt, "Question: \"" + query.text + "\"");
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
            json parsed = json::parse(*block);
            std::vector<std::string> entities;
            for (const auto& e : parsed.at("entities"))
                entities.push_back(e.get<std::string>());

            GroundingSpec no_relations = make_grounding_spec(entities);
            std::vector<Relation> relations;
            if (parsed.contains("relations")) {
                for (const auto& triple : parsed["relations"]) {
                    if (!triple.is_array() || triple.size() != 3) continue;
                    auto predicate =
                        relation_from_name(to_lower(triple[1].get<std::string>()));
                    if (!predicate) continue;
                    Relation rel{to_lower(trim(triple[0].get<std::string>())), *predicate,
                                 to_lower(trim(triple[2].get<std::string>()))};
                    auto known = [&](const std::string& label) {
                        return std::find(no_relations.entities.begin(),
                                         no_relations.entities.end(),
                                         label) != no_relations.entities.end();
                    };
                    if (known(rel.subject) && known(rel.object))
                        relations.push_back(std::move(rel));
                    else if (warnings)
                        warnings->push_back("dropped relation over unlisted entity");
                }
            }
            return make_grounding_spec(std::move(entities), std::move(relations));
        } catch (const std::exception& e) {
            last_reason = std::string("malformed extraction: ") + e.what();
        }
    }
    if (warnings)
        warnings->push_back("entity extraction fell back to rules (" + last_reason + ")");
    return fallback_extract_entities(query);
}

} // namespace qgate
