#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qgate/core.hpp"

namespace qgate {

struct SelectionConfig {
    int k = 8; // frame budget; ties always break to the earliest timestamp
};

// fused[t] = w_g*s_g[t] + w_m*s_m[t] + w_c*s_c[t]. Inputs must be Normalized
// and of equal length (StageViolation / LengthMismatch otherwise).
ScoreVector fuse_scores(const GatingWeights& weights, const ScoreVector& s_g,
                        const ScoreVector& s_m, const ScoreVector& s_c);

// Indices of the K largest fused scores, ties broken by earliest timestamp,
// returned sorted by timestamp ascending. All indices when K >= T.
std::vector<std::size_t> select_top_k(const ScoreVector& fused,
                                      const Timeline& timeline,
                                      const SelectionConfig& cfg);

// Renders the temporally-aligned prompt manifest: per selected frame an
// "[Image at MM:SS]" line, then "[Subtitle for Image at MM:SS]: <text>" when
// a subtitle covers the frame, then the question block.
SelectionResult build_prompt(const std::vector<std::size_t>& selection,
                             const Timeline& timeline,
                             const std::vector<std::optional<std::string>>& subs,
                             const Query& query, const ScoreVector& fused,
                             const GatingWeights& weights);

} // namespace qgate
