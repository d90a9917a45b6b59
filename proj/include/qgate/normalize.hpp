#pragma once

#include "qgate/core.hpp"

namespace qgate {

struct NormalizeConfig {
    // Softmax temperature; 0.5 sharpens the distribution for top-k selection.
    double temperature = 0.5;
    // The mask keeps frames with raw <= 0 at exactly zero probability.
    // false selects the standard (unmasked) softmax, kept for ablation runs.
    bool masked = true;
    // Diagnostic variant: take min/max over unmasked entries only instead of
    // the full vector. Rejected as the default; ablation only.
    bool scale_over_unmasked_only = false;
};

// Min-max scaling over the full vector; a constant vector maps to all zeros.
ScoreVector minmax_scale(const ScoreVector& raw);

// Softmax of scaled/temperature over the unmasked set {t : raw[t] > 0};
// masked entries stay exactly 0. An empty unmasked set yields the all-zero
// vector. With cfg.masked == false every entry participates.
ScoreVector masked_temperature_softmax(const ScoreVector& scaled,
                                       const ScoreVector& raw,
                                       const NormalizeConfig& cfg);

// The two steps composed: scale then softmax.
ScoreVector normalize_stream(const ScoreVector& raw, const NormalizeConfig& cfg);

// Shannon entropy (natural log) of the positive entries; 0 for an all-zero
// vector. Values are renormalized to sum 1 before taking the entropy.
double shannon_entropy(const ScoreVector& distribution);

} // namespace qgate
