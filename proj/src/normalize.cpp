#include "qgate/normalize.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace qgate {

namespace {

void require_finite(const ScoreVector& v) {
    for (double x : v.values)
        if (!std::isfinite(x))
            throw Error(ErrorCode::NonFiniteInput, "score vector has a non-finite entry");
}

} // namespace

ScoreVector minmax_scale(const ScoreVector& raw) {
    if (raw.stage != Stage::Raw)
        throw Error(ErrorCode::StageViolation, "minmax_scale expects a Raw vector");
    require_finite(raw);

    ScoreVector scaled;
    scaled.stream = raw.stream;
    scaled.stage = Stage::Scaled;
    scaled.values.assign(raw.values.size(), 0.0);
    if (raw.values.empty()) return scaled;

    auto [mn_it, mx_it] = std::minmax_element(raw.values.begin(), raw.values.end());
    double mn = *mn_it, mx = *mx_it;
    if (mx == mn) return scaled; // degenerate constant vector maps to all zeros

    double range = mx - mn;
    for (std::size_t t = 0; t < raw.values.size(); ++t)
        scaled.values[t] = std::clamp((raw.values[t] - mn) / range, 0.0, 1.0);
    return scaled;
}

ScoreVector masked_temperature_softmax(const ScoreVector& scaled,
                                       const ScoreVector& raw,
                                       const NormalizeConfig& cfg) {
    if (scaled.size() != raw.size())
        throw Error(ErrorCode::LengthMismatch, "scaled and raw lengths differ");
    if (scaled.stage != Stage::Scaled)
        throw Error(ErrorCode::StageViolation, "softmax expects a Scaled vector");
    if (!(cfg.temperature > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "temperature must be > 0");

    ScoreVector out;
    out.stream = scaled.stream;
    out.stage = Stage::Normalized;
    out.values.assign(scaled.values.size(), 0.0);

    double denom = 0.0;
    for (std::size_t t = 0; t < scaled.values.size(); ++t) {
        assert(scaled.values[t] >= 0.0 && scaled.values[t] <= 1.0);
        if (cfg.masked && raw.values[t] <= 0.0) continue;
        denom += std::exp(scaled.values[t] / cfg.temperature);
    }
    if (denom == 0.0) return out; // empty unmasked set: all-zero, flagged upstream

    for (std::size_t t = 0; t < scaled.values.size(); ++t) {
        if (cfg.masked && raw.values[t] <= 0.0) continue; // zero preserved exactly
        out.values[t] = std::exp(scaled.values[t] / cfg.temperature) / denom;
    }
    return out;
}

ScoreVector normalize_stream(const ScoreVector& raw, const NormalizeConfig& cfg) {
    if (!cfg.scale_over_unmasked_only)
        return masked_temperature_softmax(minmax_scale(raw), raw, cfg);

    // Diagnostic variant: min/max restricted to the unmasked entries.
    double mn = 0.0, mx = 0.0;
    bool any = false;
    for (double x : raw.values) {
        if (x <= 0.0) continue;
        mn = any ? std::min(mn, x) : x;
        mx = any ? std::max(mx, x) : x;
        any = true;
    }
    require_finite(raw);
    ScoreVector scaled;
    scaled.stream = raw.stream;
    scaled.stage = Stage::Scaled;
    scaled.values.assign(raw.values.size(), 0.0);
    if (any && mx > mn)
        for (std::size_t t = 0; t < raw.values.size(); ++t)
            if (raw.values[t] > 0.0)
                scaled.values[t] = std::clamp((raw.values[t] - mn) / (mx - mn), 0.0, 1.0);
    return masked_temperature_softmax(scaled, raw, cfg);
}

double shannon_entropy(const ScoreVector& distribution) {
    double mass = 0.0;
    for (double p : distribution.values)
        if (p > 0.0) mass += p;
    if (mass <= 0.0) return 0.0;
    double entropy = 0.0;
    for (double p : distribution.values) {
        if (p <= 0.0) continue;
        double q = p / mass;
        entropy -= q * std::log(q);
    }
    return entropy;
}

} // namespace qgate
