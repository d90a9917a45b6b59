#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qgate/core.hpp"
#include "qgate/normalize.hpp"
#include "qgate/select.hpp"
#include "qgate/subparse.hpp"

namespace qgate {

// Desk-scale scenario archetypes: detail-oriented (grounding-relevant),
// thematic (matching-relevant), subtitle-anchored (context-relevant).
enum class Category { Detail, Thematic, SubtitleAnchored };

const char* category_name(Category category);

struct ScenarioSpec {
    Category category = Category::SubtitleAnchored;
    double signal = 0.9;  // mean in-window score of the relevant stream
    double noise = 0.1;   // out-of-window floor
    int distractor_peaks = 8;
    double duration = 60.0;
    double fps = 1.0;
    double window_width = 10.0;
};

struct Scenario {
    std::uint64_t seed = 0;
    Timeline timeline;
    double window_start = 0.0; // ground-truth window, inclusive both ends
    double window_end = 0.0;
    Query query;
    ScoreVector raw_grounding;
    ScoreVector raw_matching;
    ScoreVector raw_context;
    SubtitleTrack subtitles;
};

// Deterministic per (seed, spec). The relevant stream carries the in-window
// signal; the irrelevant streams carry co-located distractor peaks outside
// the window (modal noise).
Scenario generate_scenario(std::uint64_t seed, const ScenarioSpec& spec);

enum class GaterChoice { Static, Heuristic, LlmStub };

const char* gater_choice_name(GaterChoice choice);

// Scripted per-category weights so the bench never needs network access.
GatingWeights llm_stub_weights(Category category);

struct BenchMetrics {
    bool hit_at_k = false;
    double recall_at_k = 0.0; // (#selected inside window) / min(K, T)
    GatingWeights weights_used;
    double entropy_of_fused = 0.0;
};

// Fragment: recall/hit of a selection against the ground-truth window.
BenchMetrics compute_metrics(const std::vector<std::size_t>& selected,
                             const Timeline& timeline, double window_start,
                             double window_end);

// Full pipeline on the planted raw vectors: normalize -> gate -> fuse ->
// top-K, scored against the window.
BenchMetrics evaluate_strategy(const Scenario& scenario, GaterChoice gater,
                               const NormalizeConfig& norm_cfg,
                               const SelectionConfig& sel_cfg);

struct SweepRow {
    double tau = 0.0;
    double mean_recall = 0.0;
    double mean_entropy = 0.0;
};

std::vector<SweepRow> temperature_sweep(const std::vector<Scenario>& scenarios,
                                        const std::vector<double>& tau_grid,
                                        GaterChoice gater,
                                        const SelectionConfig& sel_cfg);

// Bundled fixed-seed suites (deterministic, CI-sized).
std::vector<Scenario> sparse_subtitle_suite(int count = 100,
                                            std::uint64_t base_seed = 1000);
std::vector<Scenario> mixed_category_suite(int count = 300,
                                           std::uint64_t base_seed = 2000);

struct BenchRow {
    std::uint64_t seed = 0;
    std::string category;
    std::string strategy;
    double tau = 0.0;
    BenchMetrics metrics;
};

inline constexpr int kBenchSchemaVersion = 1;

// results.csv: one row per seed x strategy x tau.
std::string results_csv(const std::vector<BenchRow>& rows);
// summary.json: schema-versioned aggregates per strategy x tau.
std::string summary_json(const std::vector<BenchRow>& rows);

} // namespace qgate
