#include "qgate/select.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace qgate {

ScoreVector fuse_scores(const GatingWeights& weights, const ScoreVector& s_g,
                        const ScoreVector& s_m, const ScoreVector& s_c) {
    validate(weights);
    const ScoreVector* streams[] = {&s_g, &s_m, &s_c};
    for (const ScoreVector* s : streams) {
        if (s->stage != Stage::Normalized)
            throw Error(ErrorCode::StageViolation,
                        std::string("fuse_scores expects Normalized inputs, got ") +
                            stage_name(s->stage));
        if (s->size() != s_g.size())
            throw Error(ErrorCode::LengthMismatch, "stream lengths differ");
    }

    ScoreVector fused;
    fused.stream = std::nullopt;
    fused.stage = Stage::Fused;
    fused.values.resize(s_g.size());
    for (std::size_t t = 0; t < fused.values.size(); ++t)
        fused.values[t] = weights.grounding * s_g.values[t] +
                          weights.matching * s_m.values[t] +
                          weights.context * s_c.values[t];
    return fused;
}

std::vector<std::size_t> select_top_k(const ScoreVector& fused,
                                      const Timeline& timeline,
                                      const SelectionConfig& cfg) {
    if (fused.size() != timeline.size())
        throw Error(ErrorCode::LengthMismatch, "fused length differs from timeline");
    if (cfg.k < 1)
        throw Error(ErrorCode::ConfigInvalid, "selection budget k must be >= 1");

    std::vector<std::size_t> order(fused.size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::size_t a, std::size_t b) {
        if (fused.values[a] != fused.values[b]) return fused.values[a] > fused.values[b];
        return a < b; // tie: earliest timestamp wins
    };
    std::size_t budget = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), order.size());
    std::partial_sort(order.begin(), order.begin() + budget, order.end(), better);
    order.resize(budget);
    std::sort(order.begin(), order.end()); // temporal order for the prompt
    return order;
}

SelectionResult build_prompt(const std::vector<std::size_t>& selection,
                             const Timeline& timeline,
                             const std::vector<std::optional<std::string>>& subs,
                             const Query& query, const ScoreVector& fused,
                             const GatingWeights& weights) {
    SelectionResult result;
    result.query_id = query.id;
    result.weights = weights;

    std::ostringstream prompt;
    for (std::size_t rank = 0; rank < selection.size(); ++rank) {
        std::size_t index = selection[rank];
        if (index >= timeline.size() || index >= fused.size())
            throw Error(ErrorCode::IndexOutOfRange,
                        "selected index " + std::to_string(index) + " out of range");
        if (rank > 0 && selection[rank] <= selection[rank - 1])
            throw Error(ErrorCode::IndexOutOfRange, "selection must be temporally sorted");

        SelectedFrame frame;
        frame.t = timeline[index];
        frame.mmss = format_timestamp(frame.t);
        frame.score = fused.values[index];
        if (index < subs.size() && subs[index]) frame.subtitle = subs[index];

        prompt << "[Image at " << frame.mmss << "]\n";
        if (frame.subtitle)
            prompt << "[Subtitle for Image at " << frame.mmss << "]: " << *frame.subtitle << "\n";
        result.frames.push_back(std::move(frame));
    }
    prompt << "\nQuestion: " << query.text << "\n";
    result.prompt_text = prompt.str();
    return result;
}

} // namespace qgate
