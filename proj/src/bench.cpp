#include "qgate/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qgate/gate.hpp"

namespace qgate {

namespace {

// Uniform doubles derived from the raw engine output so scenario bytes do
// not depend on the standard library's distribution implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // inclusive bounds
    std::size_t uniform_index(std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(engine_() % (hi - lo + 1));
    }

private:
    std::mt19937_64 engine_;
};

std::vector<std::size_t> sample_outside_window(Rng& rng, std::size_t count,
                                               const Timeline& timeline,
                                               double window_start, double window_end,
                                               std::vector<bool>& taken,
                                               double margin = 2.0) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < timeline.size(); ++i) {
        double t = timeline[i];
        if (t >= window_start - margin && t <= window_end + margin) continue;
        if (!taken[i]) eligible.push_back(i);
    }
    std::vector<std::size_t> picked;
    for (std::size_t n = 0; n < count && !eligible.empty(); ++n) {
        std::size_t j = rng.uniform_index(0, eligible.size() - 1);
        picked.push_back(eligible[j]);
        taken[eligible[j]] = true;
        eligible.erase(eligible.begin() + static_cast<std::ptrdiff_t>(j));
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

struct CategoryText {
    std::string query;
    std::string anchor;
};

CategoryText category_text(Category category) {
    switch (category) {
    case Category::Detail:
        // fires the heuristic grounding keywords
        return {"How many silver cups are on the table?", ""};
    case Category::Thematic:
        // fires the heuristic matching keywords
        return {"What is the main focus of the scene?", ""};
    case Category::SubtitleAnchored:
    default:
        // fires the heuristic context keywords
        return {"Why does she leave, according to the subtitle?",
                "she leaves because of the storm warning"};
    }
}

} // namespace

const char* category_name(Category category) {
    switch (category) {
    case Category::Detail: return "detail";
    case Category::Thematic: return "thematic";
    case Category::SubtitleAnchored: return "subtitle";
    }
    return "?";
}

const char* gater_choice_name(GaterChoice choice) {
    switch (choice) {
    case GaterChoice::Static: return "static";
    case GaterChoice::Heuristic: return "heuristic";
    case GaterChoice::LlmStub: return "llm-stub";
    }
    return "?";
}

GatingWeights llm_stub_weights(Category category) {
    GatingWeights w;
    w.source = GateSource::LLM;
    switch (category) {
    case Category::Detail:
        w.grounding = 0.5; w.matching = 0.3; w.context = 0.2;
        break;
    case Category::Thematic:
        w.grounding = 0.2; w.matching = 0.6; w.context = 0.2;
        break;
    case Category::SubtitleAnchored:
        w.grounding = 0.2; w.matching = 0.1; w.context = 0.7;
        break;
    }
    return w;
}

Scenario generate_scenario(std::uint64_t seed, const ScenarioSpec& spec) {
    if (!(spec.signal > spec.noise) || spec.noise < 0.0)
        throw Error(ErrorCode::InvalidLevels,
                    "need signal > noise >= 0, got signal=" + std::to_string(spec.signal) +
                        " noise=" + std::to_string(spec.noise));
    if (spec.window_width + 10.0 > spec.duration)
        throw Error(ErrorCode::InvalidLevels, "window too wide for the duration");

    Rng rng(seed * 0x9E3779B97F4A7C15ull + 1);

    Scenario sc;
    sc.seed = seed;
    sc.timeline = build_timeline(spec.duration, spec.fps);
    const std::size_t frames = sc.timeline.size();

    double ws = static_cast<double>(
        rng.uniform_index(5, static_cast<std::size_t>(spec.duration - spec.window_width - 5.0)));
    sc.window_start = ws;
    sc.window_end = ws + spec.window_width;

    CategoryText text = category_text(spec.category);
    sc.query.text = text.query;
    sc.query.id = std::string(category_name(spec.category)) + "-" + std::to_string(seed);
    sc.query.category = category_name(spec.category);

    std::vector<bool> in_window(frames, false);
    for (std::size_t i = 0; i < frames; ++i)
        in_window[i] = sc.timeline[i] >= sc.window_start && sc.timeline[i] <= sc.window_end;

    std::vector<bool> taken(frames, false);
    // shared distractor frames: modal noise carried by the irrelevant streams
    std::vector<std::size_t> distractors = sample_outside_window(
        rng, static_cast<std::size_t>(spec.distractor_peaks), sc.timeline,
        sc.window_start, sc.window_end, taken);
    // extra support frames keep the sparse irrelevant streams from
    // concentrating all their mass on the distractors
    std::vector<std::size_t> extra_support = sample_outside_window(
        rng, 4, sc.timeline, sc.window_start, sc.window_end, taken);

    std::vector<double> grounding(frames, 0.0);
    std::vector<double> matching(frames, 0.0);
    std::vector<double> context(frames, 0.0);

    auto jitter = [&](double level, double spread) {
        return std::clamp(level + rng.uniform(-spread, spread), 0.0, 1.0);
    };

    const double lo_noise = std::max(0.02, spec.noise * 0.2);
    const double hi_noise = std::max(lo_noise + 0.01, spec.noise * 2.0);

    switch (spec.category) {
    case Category::Detail: {
        // grounding carries the evidence; matching and context push the
        // shared distractors
        std::vector<std::size_t> weak = sample_outside_window(
            rng, 15, sc.timeline, sc.window_start, sc.window_end, taken, 0.0);
        std::vector<std::size_t> rel_distractors = sample_outside_window(
            rng, 2, sc.timeline, sc.window_start, sc.window_end, taken);
        for (std::size_t i = 0; i < frames; ++i)
            if (in_window[i]) grounding[i] = jitter(spec.signal, 0.05);
        for (std::size_t i : weak) grounding[i] = rng.uniform(0.05, 0.25);
        for (std::size_t i : rel_distractors) grounding[i] = jitter(0.65, 0.05);

        for (std::size_t i = 0; i < frames; ++i) matching[i] = rng.uniform(lo_noise, hi_noise);
        for (std::size_t i : distractors) matching[i] = rng.uniform(0.70, 0.95);

        for (std::size_t i : distractors) context[i] = rng.uniform(0.65, 0.85);
        for (std::size_t i : extra_support) context[i] = rng.uniform(0.30, 0.45);
        break;
    }
    case Category::Thematic: {
        for (std::size_t i = 0; i < frames; ++i) matching[i] = rng.uniform(lo_noise, hi_noise);
        for (std::size_t i = 0; i < frames; ++i)
            if (in_window[i]) matching[i] = jitter(spec.signal, 0.05);
        std::vector<std::size_t> rel_distractors = sample_outside_window(
            rng, 2, sc.timeline, sc.window_start, sc.window_end, taken);
        for (std::size_t i : rel_distractors) matching[i] = jitter(0.60, 0.05);

        std::vector<std::size_t> weak = sample_outside_window(
            rng, 5, sc.timeline, sc.window_start, sc.window_end, taken, 0.0);
        for (std::size_t i : weak) grounding[i] = rng.uniform(0.05, 0.25);
        for (std::size_t i : distractors) grounding[i] = rng.uniform(0.70, 0.95);

        for (std::size_t i : distractors) context[i] = rng.uniform(0.65, 0.85);
        for (std::size_t i : extra_support) context[i] = rng.uniform(0.30, 0.45);
        break;
    }
    case Category::SubtitleAnchored: {
        // sparse-subtitle family: context is zero off the cue frames
        for (std::size_t i = 0; i < frames; ++i)
            if (in_window[i] && sc.timeline[i] > sc.window_start &&
                sc.timeline[i] < sc.window_end)
                context[i] = jitter(spec.signal, 0.03);
        std::vector<std::size_t> out_cues = sample_outside_window(
            rng, 5, sc.timeline, sc.window_start, sc.window_end, taken);
        for (std::size_t i : out_cues) context[i] = rng.uniform(0.12, 0.22);

        // dense weak visual floors, strong co-located distractor peaks
        for (std::size_t i = 0; i < frames; ++i) grounding[i] = rng.uniform(0.08, 0.28);
        for (std::size_t i : distractors) grounding[i] = rng.uniform(0.75, 0.95);
        for (std::size_t i = 0; i < frames; ++i) matching[i] = rng.uniform(lo_noise, hi_noise);
        for (std::size_t i : distractors) matching[i] = rng.uniform(0.75, 0.95);
        break;
    }
    }

    sc.raw_grounding = make_raw(StreamKind::Grounding, std::move(grounding));
    sc.raw_matching = make_raw(StreamKind::Matching, std::move(matching));
    sc.raw_context = make_raw(StreamKind::Context, std::move(context));

    // subtitle track mirrors the context stream's support
    SubtitleTrack track;
    track.source_format = SubtitleFormat::SRT;
    if (spec.category == Category::SubtitleAnchored) {
        track.cues.push_back(SubtitleCue{sc.window_start + 0.5, sc.window_end - 0.5,
                                         text.anchor});
    }
    for (std::size_t i = 0; i < frames; ++i) {
        if (sc.raw_context.values[i] <= 0.0) continue;
        double t = sc.timeline[i];
        if (spec.category == Category::SubtitleAnchored && in_window[i]) continue;
        track.cues.push_back(SubtitleCue{t - 0.4, t + 0.4, "background chatter"});
    }
    std::stable_sort(track.cues.begin(), track.cues.end(),
                     [](const SubtitleCue& a, const SubtitleCue& b) { return a.start < b.start; });
    if (!track.cues.empty() && track.cues.front().start < 0.0)
        track.cues.front().start = 0.0;
    sc.subtitles = track;
    return sc;
}

BenchMetrics compute_metrics(const std::vector<std::size_t>& selected,
                             const Timeline& timeline, double window_start,
                             double window_end) {
    BenchMetrics metrics;
    if (selected.empty()) return metrics;
    std::size_t inside = 0;
    for (std::size_t index : selected) {
        if (index >= timeline.size())
            throw Error(ErrorCode::IndexOutOfRange, "selected index out of range");
        double t = timeline[index];
        if (t >= window_start && t <= window_end) ++inside;
    }
    metrics.recall_at_k = static_cast<double>(inside) / static_cast<double>(selected.size());
    metrics.hit_at_k = metrics.recall_at_k > 0.0;
    return metrics;
}

BenchMetrics evaluate_strategy(const Scenario& scenario, GaterChoice gater,
                               const NormalizeConfig& norm_cfg,
                               const SelectionConfig& sel_cfg) {
    ScoreVector n_g = normalize_stream(scenario.raw_grounding, norm_cfg);
    ScoreVector n_m = normalize_stream(scenario.raw_matching, norm_cfg);
    ScoreVector n_c = normalize_stream(scenario.raw_context, norm_cfg);

    GatingWeights weights;
    switch (gater) {
    case GaterChoice::Static:
        weights = static_gate().weights;
        break;
    case GaterChoice::Heuristic:
        weights = heuristic_gate(scenario.query).weights;
        break;
    case GaterChoice::LlmStub: {
        Category category = Category::SubtitleAnchored;
        if (scenario.query.category == category_name(Category::Detail))
            category = Category::Detail;
        else if (scenario.query.category == category_name(Category::Thematic))
            category = Category::Thematic;
        weights = llm_stub_weights(category);
        break;
    }
    }

    ScoreVector fused = fuse_scores(weights, n_g, n_m, n_c);
    std::vector<std::size_t> selected = select_top_k(fused, scenario.timeline, sel_cfg);

    BenchMetrics metrics = compute_metrics(selected, scenario.timeline,
                                           scenario.window_start, scenario.window_end);
    metrics.weights_used = weights;
    metrics.entropy_of_fused = shannon_entropy(fused);
    return metrics;
}

std::vector<SweepRow> temperature_sweep(const std::vector<Scenario>& scenarios,
                                        const std::vector<double>& tau_grid,
                                        GaterChoice gater,
                                        const SelectionConfig& sel_cfg) {
    std::vector<SweepRow> rows;
    for (double tau : tau_grid) {
        if (!(tau > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "tau grid values must be > 0");
        NormalizeConfig cfg;
        cfg.temperature = tau;
        double recall_sum = 0.0, entropy_sum = 0.0;
        for (const auto& scenario : scenarios) {
            BenchMetrics metrics = evaluate_strategy(scenario, gater, cfg, sel_cfg);
            recall_sum += metrics.recall_at_k;
            entropy_sum += metrics.entropy_of_fused;
        }
        double n = scenarios.empty() ? 1.0 : static_cast<double>(scenarios.size());
        rows.push_back(SweepRow{tau, recall_sum / n, entropy_sum / n});
    }
    return rows;
}

namespace {

std::vector<Scenario> build_suite(int count, std::uint64_t base_seed,
                                  const std::vector<Category>& cycle) {
    std::vector<Scenario> scenarios(static_cast<std::size_t>(count));
    std::atomic<std::size_t> next{0};
    std::size_t workers = std::min<std::size_t>(
        std::max(1u, std::thread::hardware_concurrency()), scenarios.size() ? scenarios.size() : 1);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < scenarios.size();
                 i = next.fetch_add(1)) {
                ScenarioSpec spec;
                spec.category = cycle[i % cycle.size()];
                scenarios[i] = generate_scenario(base_seed + i, spec);
            }
        });
    }
    for (auto& t : pool) t.join();
    return scenarios;
}

} // namespace

std::vector<Scenario> sparse_subtitle_suite(int count, std::uint64_t base_seed) {
    return build_suite(count, base_seed, {Category::SubtitleAnchored});
}

std::vector<Scenario> mixed_category_suite(int count, std::uint64_t base_seed) {
    return build_suite(count, base_seed,
                       {Category::Detail, Category::Thematic, Category::SubtitleAnchored});
}

std::string results_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "schema_version,seed,category,strategy,tau,hit_at_k,recall_at_k,"
           "w_grounding,w_matching,w_context,entropy_fused\n";
    char buf[256];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%llu,%s,%s,%.3f,%d,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                      kBenchSchemaVersion, static_cast<unsigned long long>(row.seed),
                      row.category.c_str(), row.strategy.c_str(), row.tau,
                      row.metrics.hit_at_k ? 1 : 0, row.metrics.recall_at_k,
                      row.metrics.weights_used.grounding, row.metrics.weights_used.matching,
                      row.metrics.weights_used.context, row.metrics.entropy_of_fused);
        out << buf;
    }
    return out.str();
}

std::string summary_json(const std::vector<BenchRow>& rows) {
    struct Aggregate {
        int count = 0;
        double recall = 0.0, hit = 0.0, entropy = 0.0;
    };
    std::vector<std::pair<std::string, Aggregate>> groups;
    for (const auto& row : rows) {
        char key[128];
        std::snprintf(key, sizeof(key), "%s@tau=%.3f", row.strategy.c_str(), row.tau);
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const auto& g) { return g.first == key; });
        if (it == groups.end()) {
            groups.emplace_back(key, Aggregate{});
            it = std::prev(groups.end());
        }
        it->second.count += 1;
        it->second.recall += row.metrics.recall_at_k;
        it->second.hit += row.metrics.hit_at_k ? 1.0 : 0.0;
        it->second.entropy += row.metrics.entropy_of_fused;
    }

    nlohmann::json out;
    out["schema_version"] = kBenchSchemaVersion;
    out["groups"] = nlohmann::json::array();
    for (const auto& [key, agg] : groups) {
        double n = std::max(1, agg.count);
        out["groups"].push_back({{"group", key},
                                 {"count", agg.count},
                                 {"mean_recall_at_k", agg.recall / n},
                                 {"mean_hit_at_k", agg.hit / n},
                                 {"mean_entropy_fused", agg.entropy / n}});
    }
    return out.dump(2) + "\n";
}

} // namespace qgate
