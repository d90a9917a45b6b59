// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Expected values come from the reference oracles in oracles.hpp and
// from frozen arbitrary-precision constants.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "qgate/bench.hpp"
#include "qgate/clients.hpp"
#include "qgate/gate.hpp"
#include "qgate/ingest.hpp"
#include "qgate/normalize.hpp"
#include "qgate/pipeline.hpp"
#include "qgate/select.hpp"
#include "qgate/subparse.hpp"
#include "oracles.hpp"

using namespace qgate;

namespace {

const std::string kFixtureDir = QGATE_FIXTURE_DIR;

int g_failures = 0;

struct Criterion {
    int number;
    std::string detail;
    bool ok = true;

    Criterion(int n, std::string what) : number(n), detail(std::move(what)) {}

    void require(bool condition, const std::string& note) {
        if (!condition && ok) {
            ok = false;
            detail += " [failed: " + note + "]";
        }
    }

    void finish(double elapsed_seconds = -1.0) {
        if (!ok) ++g_failures;
        if (elapsed_seconds >= 0.0)
            std::printf("%s criterion %2d: %s (%.2fs)\n", ok ? "PASS" : "FAIL", number,
                        detail.c_str(), elapsed_seconds);
        else
            std::printf("%s criterion %2d: %s\n", ok ? "PASS" : "FAIL", number,
                        detail.c_str());
    }
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

ScoreVector raw_vec(std::vector<double> values) {
    return make_raw(StreamKind::Context, std::move(values));
}

void criterion_1_zero_preservation() {
    Criterion c(1, "masked softmax zero preservation on 1000 random vectors");
    double start = now_seconds();
    oracle::Rand rand(101);
    NormalizeConfig cfg;
    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        std::size_t n = rand.index(1, 512);
        std::vector<double> raw(n);
        for (double& x : raw)
            x = (rand.index(0, 3) == 0) ? 0.0 : rand.uniform(-1.0, 1.0);
        ScoreVector out = normalize_stream(raw_vec(raw), cfg);
        double mass = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (raw[i] <= 0.0)
                c.require(out.values[i] == 0.0, "masked entry not exactly zero");
            else
                any = true;
            mass += out.values[i];
        }
        if (any) c.require(std::abs(mass - 1.0) <= 1e-9, "unmasked mass not 1 +/- 1e-9");
        else c.require(mass == 0.0, "all-masked vector must stay all-zero");
    }
    double elapsed = now_seconds() - start;
    c.require(elapsed < 1.0, "runtime over 1 s");
    c.finish(elapsed);
}

void criterion_2_worked_example() {
    Criterion c(2, "worked normalization of raw [0,2,4,0,3] at tau=0.5");
    // frozen from a 50-digit evaluation of exp(scaled/0.5) over {1,2,4}
    const std::vector<double> frozen = {0.0, 0.1863237232, 0.5064803911, 0.0, 0.3071958857};
    ScoreVector out = normalize_stream(raw_vec({0, 2, 4, 0, 3}), {});
    std::vector<double> reference = oracle::normalize_reference({0, 2, 4, 0, 3}, 0.5);
    for (std::size_t i = 0; i < 5; ++i) {
        c.require(std::abs(out.values[i] - frozen[i]) <= 1e-4, "off the frozen constants");
        c.require(std::abs(out.values[i] - reference[i]) <= 1e-12, "off the oracle");
    }
    c.finish();
}

void criterion_3_scale_invariance() {
    Criterion c(3, "positive-scale invariance over 100 random (raw, lambda) pairs");
    oracle::Rand rand(103);
    NormalizeConfig cfg;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = rand.index(2, 128);
        std::vector<double> raw(n), scaled_raw(n);
        for (double& x : raw) x = rand.uniform(-0.5, 1.0);
        double lambda = rand.uniform(1e-4, 1e4);
        for (std::size_t i = 0; i < n; ++i) scaled_raw[i] = raw[i] * lambda;
        ScoreVector a = normalize_stream(raw_vec(raw), cfg);
        ScoreVector b = normalize_stream(raw_vec(scaled_raw), cfg);
        for (std::size_t i = 0; i < n; ++i)
            c.require(std::abs(a.values[i] - b.values[i]) <= 1e-12,
                      "lambda-scaled input changed the output");
    }
    c.finish();
}

void criterion_4_entropy_monotonicity() {
    Criterion c(4, "entropy strictly increases over tau in {0.1,0.3,0.5,0.7,0.9}");
    oracle::Rand rand(104);
    const double taus[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = rand.index(2, 256);
        std::vector<double> raw(n);
        for (double& x : raw) x = rand.uniform(0.01, 1.0);
        raw[0] = 1.0;
        raw[n - 1] = 0.3; // guarantee two distinct unmasked values
        double previous = -1.0;
        for (double tau : taus) {
            NormalizeConfig cfg;
            cfg.temperature = tau;
            double h = shannon_entropy(normalize_stream(raw_vec(raw), cfg));
            c.require(h > previous, "entropy not strictly increasing");
            previous = h;
        }
    }
    c.finish();
}

void criterion_5_fusion_identities() {
    Criterion c(5, "one-hot fusion is bit-exact; equal-weight identity within 1e-12");
    oracle::Rand rand(105);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = rand.index(1, 64);
        auto normalized = [&](StreamKind kind) {
            ScoreVector v;
            v.stream = kind;
            v.stage = Stage::Normalized;
            for (std::size_t i = 0; i < n; ++i) v.values.push_back(rand.uniform(0, 1));
            double mass = 0;
            for (double x : v.values) mass += x;
            for (double& x : v.values) x /= mass;
            return v;
        };
        ScoreVector g = normalized(StreamKind::Grounding);
        ScoreVector m = normalized(StreamKind::Matching);
        ScoreVector cc = normalized(StreamKind::Context);

        ScoreVector one_hot = fuse_scores({1, 0, 0, GateSource::Static}, g, m, cc);
        c.require(one_hot.values == g.values, "one-hot weights are not bit-exact");

        ScoreVector same_g = g, same_m = g, same_c = g;
        same_m.stream = StreamKind::Matching;
        same_c.stream = StreamKind::Context;
        ScoreVector equal = fuse_scores({1.0 / 3, 1.0 / 3, 1.0 / 3, GateSource::Static},
                                        same_g, same_m, same_c);
        for (std::size_t i = 0; i < n; ++i)
            c.require(std::abs(equal.values[i] - g.values[i]) <= 1e-12,
                      "equal-weight fusion drifted");
    }
    c.finish();
}

void criterion_6_topk_oracle() {
    Criterion c(6, "top-K matches the brute-force oracle on 1000 vectors with ties");
    oracle::Rand rand(106);
    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        std::size_t n = rand.index(1, 1000);
        std::vector<double> values(n);
        for (double& x : values) x = rand.uniform(0.0, 1.0);
        for (std::size_t i = 0; i + 1 < n; i += 2) values[i + 1] = values[i]; // ties

        Timeline timeline;
        timeline.duration = static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            timeline.timestamps.push_back(static_cast<double>(i));

        ScoreVector fused;
        fused.stage = Stage::Fused;
        fused.values = values;
        std::size_t k = rand.index(1, n + 8);
        auto got = select_top_k(fused, timeline, {static_cast<int>(k)});
        c.require(got == oracle::top_k_reference(values, k), "selection differs from oracle");
    }
    c.finish();
}

void criterion_7_heuristic_dominance() {
    Criterion c(7, "heuristic gating argmax dominance on the 30-query fixture");
    const std::vector<std::string> grounding_queries = {
        "How many cars pass the gate?", "What color is her umbrella?",
        "Count the chairs around the table.", "Which object does he pick up?",
        "Where is the black suitcase?", "How many people enter the lobby?",
        "What color are the team jerseys?", "Count the windows on the left wall.",
        "Which object falls off the shelf?", "Where is the exit sign?"};
    const std::vector<std::string> context_queries = {
        "Why does she leave, according to the subtitle?",
        "What reason does the narrator give?", "Why did the deal collapse?",
        "What does the coach say at halftime?", "Which name does the caller mention?",
        "According to the dialogue, who won?", "Why is the museum closed?",
        "What does the subtitle mention about the storm?",
        "What reason is given for the delay?", "Why does the crowd cheer?"};
    const std::vector<std::string> neutral_queries = {
        "Describe the video.", "Summarize the clip.", "What happens at the end?",
        "Give a short description.", "What is shown here?", "Describe the weather.",
        "What is the video about?", "List the events in order.",
        "Provide a brief recap.", "What occurs before the credits?"};

    for (const auto& text : grounding_queries) {
        GatingWeights w = heuristic_gate(Query{text, "g", ""}).weights;
        c.require(w.grounding > w.matching && w.grounding > w.context,
                  "grounding not argmax for: " + text);
    }
    for (const auto& text : context_queries) {
        GatingWeights w = heuristic_gate(Query{text, "c", ""}).weights;
        c.require(w.context > w.matching && w.context > w.grounding,
                  "context not argmax for: " + text);
    }
    for (const auto& text : neutral_queries) {
        GatingWeights w = heuristic_gate(Query{text, "m", ""}).weights;
        c.require(w.matching > w.grounding && w.matching > w.context,
                  "matching not argmax for: " + text);
    }

    // worked softmax of potentials (2.0, 1.0, 0.5)
    GatingWeights worked = heuristic_gate(Query{"How many cars pass?", "w", ""}).weights;
    c.require(std::abs(worked.grounding - 0.6285) <= 1e-3, "worked grounding weight");
    c.require(std::abs(worked.matching - 0.2312) <= 1e-3, "worked matching weight");
    c.require(std::abs(worked.context - 0.1403) <= 1e-3, "worked context weight");
    c.finish();
}

void criterion_8_static_baseline() {
    Criterion c(8, "static gate returns exactly (1/3, 1/3, 1/3)");
    GatingWeights w = static_gate().weights;
    c.require(w.grounding == 1.0 / 3.0 && w.matching == 1.0 / 3.0 &&
                  w.context == 1.0 / 3.0,
              "weights are not exactly one third");
    c.require(w.source == GateSource::Static, "source tag");
    c.finish();
}

void criterion_9_mask_suppression_gap() {
    Criterion c(9, "masked vs unmasked Recall@8 gap on the 100-seed sparse suite");
    double start = now_seconds();
    std::vector<Scenario> suite = sparse_subtitle_suite(100);
    NormalizeConfig masked, unmasked;
    unmasked.masked = false;
    double masked_recall = 0, unmasked_recall = 0;
    for (const auto& sc : suite) {
        masked_recall += evaluate_strategy(sc, GaterChoice::Static, masked, {}).recall_at_k;
        unmasked_recall +=
            evaluate_strategy(sc, GaterChoice::Static, unmasked, {}).recall_at_k;
    }
    double gap = (masked_recall - unmasked_recall) / static_cast<double>(suite.size());
    char measured[96];
    std::snprintf(measured, sizeof(measured), " (gap %.3f, need >= 0.05)", gap);
    c.detail += measured;
    c.require(gap >= 0.05, "mask-suppression gap below tolerance");
    double elapsed = now_seconds() - start;
    c.require(elapsed < 10.0, "runtime over 10 s");
    c.finish(elapsed);
}

void criterion_10_dynamic_vs_static_gap() {
    Criterion c(10, "heuristic vs static Hit@8 gap on the 300-seed mixed suite");
    double start = now_seconds();
    std::vector<Scenario> suite = mixed_category_suite(300);
    double heuristic_hit = 0, static_hit = 0;
    for (const auto& sc : suite) {
        heuristic_hit +=
            evaluate_strategy(sc, GaterChoice::Heuristic, {}, {}).hit_at_k ? 1.0 : 0.0;
        static_hit += evaluate_strategy(sc, GaterChoice::Static, {}, {}).hit_at_k ? 1.0 : 0.0;
    }
    double gap = (heuristic_hit - static_hit) / static_cast<double>(suite.size());
    char measured[96];
    std::snprintf(measured, sizeof(measured), " (gap %.3f, need >= 0.05)", gap);
    c.detail += measured;
    c.require(gap >= 0.05, "dynamic-vs-static gap below tolerance");
    double elapsed = now_seconds() - start;
    c.require(elapsed < 30.0, "runtime over 30 s");
    c.finish(elapsed);
}

void criterion_11_subtitle_conformance() {
    Criterion c(11, "subtitle fixtures parse to the checked-in cue lists exactly");
    auto check_track = [&](const std::string& fixture, const std::string& expected_file) {
        std::vector<std::string> warnings;
        SubtitleTrack track = parse_subtitle_file(kFixtureDir + "/" + fixture, &warnings);
        c.require(warnings.empty(), fixture + " produced warnings");
        nlohmann::json expected =
            nlohmann::json::parse(read_file(kFixtureDir + "/" + expected_file));
        c.require(track.cues.size() == expected.size(), fixture + " cue count");
        for (std::size_t i = 0; i < track.cues.size() && i < expected.size(); ++i) {
            c.require(track.cues[i].start == expected[i]["start"].get<double>(),
                      fixture + " start " + std::to_string(i));
            c.require(track.cues[i].end == expected[i]["end"].get<double>(),
                      fixture + " end " + std::to_string(i));
            c.require(track.cues[i].text == expected[i]["text"].get<std::string>(),
                      fixture + " text " + std::to_string(i));
        }
    };
    check_track("conformance.srt", "expected_srt_cues.json");
    check_track("conformance.vtt", "expected_vtt_cues.json");

    SubtitleTrack boundary;
    boundary.cues.push_back({1.0, 3.0, "x"});
    c.require(!cue_at(boundary, 3.0).has_value(), "cue [1,3) must not cover t=3.0");
    c.finish();
}

void criterion_12_golden_manifest() {
    Criterion c(12, "golden end-to-end manifest is byte-identical");
    double start = now_seconds();
    PipelineConfig cfg = load_pipeline_config(kFixtureDir + "/pipeline_config.json");
    PipelineRun run = run_pipeline(cfg);
    std::string manifest = manifest_json(run.result);

    // values against the arbitrary-precision reference walk-through
    nlohmann::json expected =
        nlohmann::json::parse(read_file(kFixtureDir + "/expected_manifest_values.json"));
    c.require(run.result.frames.size() == expected["frames"].size(), "frame count");
    for (std::size_t i = 0; i < run.result.frames.size(); ++i) {
        const auto& want = expected["frames"][i];
        c.require(run.result.frames[i].t == want["t"].get<double>(), "frame timestamp");
        c.require(std::abs(run.result.frames[i].score - want["score"].get<double>()) <= 1e-12,
                  "fused score off the reference walk-through");
    }
    c.require(run.result.prompt_text.find("[Image at 00:08]") != std::string::npos,
              "image anchor line missing");
    c.require(run.result.prompt_text.find(
                  "[Subtitle for Image at 00:08]: She decides to leave") != std::string::npos,
              "subtitle anchor line missing");

    std::string golden_path = kFixtureDir + "/golden_manifest.json";
    try {
        c.require(manifest == read_file(golden_path), "manifest differs from the golden file");
    } catch (const Error&) {
        c.require(false, "golden_manifest.json missing");
    }
    double elapsed = now_seconds() - start;
    c.require(elapsed < 1.0, "runtime over 1 s");
    c.finish(elapsed);
}

void criterion_13_llm_gater_robustness() {
    Criterion c(13, "llm gater handles clean JSON, prose-wrapped JSON, and garbage");
    httplib::Server server;
    int port = server.bind_to_any_port("127.0.0.1");
    int request_count = 0;
    std::string mode = "clean";
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++request_count;
        std::string content;
        if (mode == "clean")
            content = R"({"grounding": 0.2, "matching": 0.2, "context": 0.6})";
        else if (mode == "prose")
            content = "Happy to help! My routing:\n```json\n"
                      "{\"grounding\": 0.1, \"matching\": 0.2, \"context\": 0.7}\n```";
        else
            content = "I cannot produce JSON right now.";
        nlohmann::json body = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
        res.set_content(body.dump(), "application/json");
    });
    std::thread listener([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    EndpointConfig endpoint;
    endpoint.base_url = "http://127.0.0.1:" + std::to_string(port);
    endpoint.api_key = "key";
    endpoint.model_name = "mock";
    endpoint.backoff_initial_ms = 1;
    ChatFn chat = make_chat_fn(endpoint);
    Query query{"Why does she leave, according to the subtitle?", "q13", ""};

    auto sums_to_one = [](const GatingWeights& w) {
        return std::abs(w.grounding + w.matching + w.context - 1.0) <= 1e-6;
    };

    GaterDecision clean = llm_gate(query, chat);
    c.require(clean.weights.source == GateSource::LLM, "clean JSON not accepted");
    c.require(std::abs(clean.weights.context - 0.6) <= 1e-9, "clean weights wrong");
    c.require(sums_to_one(clean.weights), "clean weights do not sum to 1");

    mode = "prose";
    GaterDecision prose = llm_gate(query, chat);
    c.require(prose.weights.source == GateSource::LLM, "prose-wrapped JSON not accepted");
    c.require(std::abs(prose.weights.context - 0.7) <= 1e-9, "prose weights wrong");
    c.require(sums_to_one(prose.weights), "prose weights do not sum to 1");

    mode = "garbage";
    request_count = 0;
    GaterDecision fallback = llm_gate(query, chat);
    c.require(request_count == 2, "garbage path must retry exactly once");
    c.require(fallback.weights.source == GateSource::LLMFallback,
              "garbage twice must fall back to the heuristic");
    c.require(sums_to_one(fallback.weights), "fallback weights do not sum to 1");
    c.require(fallback.weights.context > fallback.weights.matching,
              "fallback ignored the context keywords");

    server.stop();
    listener.join();
    c.finish();
}

} // namespace

int main() {
    std::printf("q-gate acceptance suite\n");
    criterion_1_zero_preservation();
    criterion_2_worked_example();
    criterion_3_scale_invariance();
    criterion_4_entropy_monotonicity();
    criterion_5_fusion_identities();
    criterion_6_topk_oracle();
    criterion_7_heuristic_dominance();
    criterion_8_static_baseline();
    criterion_9_mask_suppression_gap();
    criterion_10_dynamic_vs_static_gap();
    criterion_11_subtitle_conformance();
    criterion_12_golden_manifest();
    criterion_13_llm_gater_robustness();

    if (g_failures == 0) {
        std::printf("all 13 criteria passed\n");
        return 0;
    }
    std::printf("%d of 13 criteria FAILED\n", g_failures);
    return 1;
}
