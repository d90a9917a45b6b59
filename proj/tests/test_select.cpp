#include <doctest.h>

#include <cmath>

#include "qgate/normalize.hpp"
#include "qgate/select.hpp"
#include "oracles.hpp"

using namespace qgate;

namespace {

ScoreVector normalized(StreamKind kind, std::vector<double> values) {
    ScoreVector v;
    v.stream = kind;
    v.stage = Stage::Normalized;
    v.values = std::move(values);
    return v;
}

ScoreVector fused_vec(std::vector<double> values) {
    ScoreVector v;
    v.stage = Stage::Fused;
    v.values = std::move(values);
    return v;
}

GatingWeights weights(double g, double m, double c) {
    return GatingWeights{g, m, c, GateSource::Static};
}

} // namespace

TEST_CASE("one-hot weights reproduce the selected stream bit-exactly") {
    ScoreVector s_g = normalized(StreamKind::Grounding, {0.25, 0.5, 0.25});
    ScoreVector s_m = normalized(StreamKind::Matching, {0.1, 0.2, 0.7});
    ScoreVector s_c = normalized(StreamKind::Context, {0.0, 1.0, 0.0});
    ScoreVector fused = fuse_scores(weights(1, 0, 0), s_g, s_m, s_c);
    CHECK(fused.values == s_g.values);
    CHECK(fused.stage == Stage::Fused);
    CHECK(!fused.stream.has_value());
}

TEST_CASE("fusion is the weighted per-element sum") {
    ScoreVector s_g = normalized(StreamKind::Grounding, {1.0, 0.0});
    ScoreVector s_m = normalized(StreamKind::Matching, {0.0, 1.0});
    ScoreVector s_c = normalized(StreamKind::Context, {0.5, 0.5});
    ScoreVector fused = fuse_scores(weights(0.5, 0.3, 0.2), s_g, s_m, s_c);
    CHECK(fused.values[0] == doctest::Approx(0.6));
    CHECK(fused.values[1] == doctest::Approx(0.4));

    double mass = fused.values[0] + fused.values[1];
    CHECK(mass <= 1.0 + 1e-9);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9)); // no stream is all-zero
}

TEST_CASE("equal weights on identical streams reproduce the stream") {
    std::vector<double> v = {0.2, 0.5, 0.3};
    ScoreVector fused = fuse_scores(weights(1.0 / 3, 1.0 / 3, 1.0 / 3),
                                    normalized(StreamKind::Grounding, v),
                                    normalized(StreamKind::Matching, v),
                                    normalized(StreamKind::Context, v));
    for (std::size_t i = 0; i < v.size(); ++i)
        CHECK(std::abs(fused.values[i] - v[i]) < 1e-12);
}

TEST_CASE("fusion rejects stage and length violations") {
    ScoreVector raw = make_raw(StreamKind::Grounding, {0.5, 0.5});
    ScoreVector ok_m = normalized(StreamKind::Matching, {0.5, 0.5});
    ScoreVector ok_c = normalized(StreamKind::Context, {0.5, 0.5});
    try {
        fuse_scores(weights(1, 0, 0), raw, ok_m, ok_c);
        FAIL("expected StageViolation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StageViolation);
    }

    ScoreVector short_g = normalized(StreamKind::Grounding, {1.0});
    CHECK_THROWS_AS(fuse_scores(weights(1, 0, 0), short_g, ok_m, ok_c), Error);
}

TEST_CASE("top-k selection orders by score with earliest-timestamp ties") {
    Timeline timeline = build_timeline(2.0, 1.0);
    CHECK(select_top_k(fused_vec({0.1, 0.9, 0.5}), timeline, {2}) ==
          std::vector<std::size_t>{1, 2});
    CHECK(select_top_k(fused_vec({0.5, 0.5, 0.1}), timeline, {1}) ==
          std::vector<std::size_t>{0});
    CHECK(select_top_k(fused_vec({0.5, 0.5, 0.1}), timeline, {5}) ==
          std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("top-k equals the brute-force oracle on random vectors with ties") {
    oracle::Rand rand(23);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = rand.index(1, 200);
        std::vector<double> values(n);
        for (double& x : values) x = rand.uniform(0.0, 1.0);
        // inject duplicate values to exercise the tie rule
        for (std::size_t i = 0; i + 1 < n; i += 3) values[i + 1] = values[i];

        Timeline timeline = build_timeline(static_cast<double>(n), 1.0);
        timeline.timestamps.resize(n);

        std::size_t k = rand.index(1, n + 4);
        auto got = select_top_k(fused_vec(values), timeline, {static_cast<int>(k)});
        auto expected = oracle::top_k_reference(values, k);
        CHECK(got == expected);
    }
}

TEST_CASE("argmax is preserved under one-hot weights") {
    oracle::Rand rand(29);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = rand.index(2, 64);
        std::vector<double> g(n), m(n), c(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = rand.uniform(0, 1);
            m[i] = rand.uniform(0, 1);
            c[i] = rand.uniform(0, 1);
        }
        Timeline timeline = build_timeline(static_cast<double>(n), 1.0);
        timeline.timestamps.resize(n);

        ScoreVector fused = fuse_scores(weights(1, 0, 0),
                                        normalized(StreamKind::Grounding, g),
                                        normalized(StreamKind::Matching, m),
                                        normalized(StreamKind::Context, c));
        CHECK(select_top_k(fused, timeline, {3}) ==
              select_top_k(fused_vec(g), timeline, {3}));
    }
}

TEST_CASE("raising the context weight never demotes context-dominant frames") {
    oracle::Rand rand(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 16;
        std::vector<double> g(n), m(n), c(n);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = rand.uniform(0, 1);
            m[i] = rand.uniform(0, 1);
            c[i] = rand.uniform(0, 1);
        }
        double wc1 = rand.uniform(0.1, 0.5);
        double wc2 = rand.uniform(wc1, 0.95);
        double rest1 = 1.0 - wc1, rest2 = 1.0 - wc2;
        double split = rand.uniform(0.2, 0.8);
        GatingWeights w1 = weights(rest1 * split, rest1 * (1 - split), wc1);
        GatingWeights w2 = weights(rest2 * split, rest2 * (1 - split), wc2);

        ScoreVector f1 = fuse_scores(w1, normalized(StreamKind::Grounding, g),
                                     normalized(StreamKind::Matching, m),
                                     normalized(StreamKind::Context, c));
        ScoreVector f2 = fuse_scores(w2, normalized(StreamKind::Grounding, g),
                                     normalized(StreamKind::Matching, m),
                                     normalized(StreamKind::Context, c));
        for (std::size_t i = 0; i < n; ++i)
            if (c[i] > g[i] && c[i] > m[i])
                CHECK(f2.values[i] >= f1.values[i] - 1e-12);
    }
}

TEST_CASE("prompt rendering pairs image and subtitle lines by timestamp") {
    Timeline timeline = build_timeline(200.0, std::vector<double>{5.0, 10.0, 125.0});
    std::vector<std::optional<std::string>> subs = {std::nullopt, std::nullopt,
                                                    std::string("Hello")};
    ScoreVector fused = fused_vec({0.2, 0.3, 0.5});
    Query query{"Why does she leave?", "q1", ""};

    SelectionResult result = build_prompt({2}, timeline, subs, query, fused,
                                          weights(0.2, 0.1, 0.7));
    CHECK(result.prompt_text ==
          "[Image at 02:05]\n[Subtitle for Image at 02:05]: Hello\n\nQuestion: Why does she leave?\n");
    REQUIRE(result.frames.size() == 1);
    CHECK(result.frames[0].t == 125.0);
    CHECK(result.frames[0].mmss == "02:05");
    CHECK(result.frames[0].score == 0.5);
    CHECK(result.frames[0].subtitle == "Hello");

    // frames without a covering cue get no subtitle line
    SelectionResult bare = build_prompt({0, 1}, timeline, subs, query, fused,
                                        weights(0.2, 0.1, 0.7));
    CHECK(bare.prompt_text ==
          "[Image at 00:05]\n[Image at 00:10]\n\nQuestion: Why does she leave?\n");
    CHECK(!bare.frames[0].subtitle.has_value());

    // byte-identical across repeated renders
    SelectionResult again = build_prompt({0, 1}, timeline, subs, query, fused,
                                         weights(0.2, 0.1, 0.7));
    CHECK(bare.prompt_text == again.prompt_text);

    CHECK_THROWS_AS(build_prompt({7}, timeline, subs, query, fused, weights(1, 0, 0)),
                    Error);
}
