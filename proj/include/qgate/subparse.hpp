#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgate/core.hpp"

namespace qgate {

struct SubtitleCue {
    double start = 0.0; // seconds, inclusive
    double end = 0.0;   // seconds, exclusive
    std::string text;   // internal newlines collapsed to single spaces

    friend bool operator==(const SubtitleCue&, const SubtitleCue&) = default;
};

enum class SubtitleFormat { SRT, WebVTT };

struct SubtitleTrack {
    std::vector<SubtitleCue> cues; // sorted by start; overlaps permitted
    SubtitleFormat source_format = SubtitleFormat::SRT;
};

// Parses SRT or WebVTT text. Without a hint, a leading "WEBVTT" selects
// WebVTT, anything else SRT. UTF-8 BOM and CRLF are tolerated. Malformed cue
// blocks are skipped with a collected warning; zero parsed cues is the
// EmptyTrack error so callers can degrade to all-zero context scores
// deliberately.
SubtitleTrack parse_subtitles(std::string_view content,
                              std::optional<SubtitleFormat> format_hint = {},
                              std::vector<std::string>* warnings = nullptr);

SubtitleTrack parse_subtitle_file(const std::string& path,
                                  std::vector<std::string>* warnings = nullptr);

// Space-joined text of all cues with start <= t < end, in start order;
// absent when no cue covers t. A positive lookback extends each cue's end so
// frames in a short silence gap right after a spoken cue still map to it
// (audio-visual lag hook; default off).
std::optional<std::string> cue_at(const SubtitleTrack& track, double t,
                                  double lookback_seconds = 0.0);

// Element k equals cue_at(track, timeline[k], lookback_seconds).
std::vector<std::optional<std::string>> align_track(const SubtitleTrack& track,
                                                    const Timeline& timeline,
                                                    double lookback_seconds = 0.0);

// Canonical SRT form: 1-based indices, "HH:MM:SS,mmm" timestamps, one text
// line per cue. Re-parsing the output yields an identical cue list.
std::string to_srt(const SubtitleTrack& track);

} // namespace qgate
