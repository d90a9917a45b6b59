#include "qgate/subparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qgate/util.hpp"

namespace qgate {

namespace {

std::vector<std::string> split_lines(std::string_view content) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t nl = content.find('\n', start);
        std::string_view line = (nl == std::string_view::npos)
                                    ? content.substr(start)
                                    : content.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

// "HH:MM:SS,mmm", "HH:MM:SS.mmm" or "MM:SS.mmm" -> fractional seconds.
std::optional<double> parse_cue_time(std::string_view text) {
    std::string s = trim(text);
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t colon = s.find(':', pos);
        if (colon == std::string::npos) {
            parts.push_back(s.substr(pos));
            break;
        }
        parts.push_back(s.substr(pos, colon - pos));
        pos = colon + 1;
    }
    if (parts.size() < 2 || parts.size() > 3) return std::nullopt;

    auto parse_int = [](const std::string& p) -> std::optional<long> {
        if (p.empty()) return std::nullopt;
        for (char c : p)
            if (c < '0' || c > '9') return std::nullopt;
        return std::stol(p);
    };

    std::string sec_part = parts.back();
    std::replace(sec_part.begin(), sec_part.end(), ',', '.');
    std::size_t dot = sec_part.find('.');
    std::string whole = (dot == std::string::npos) ? sec_part : sec_part.substr(0, dot);
    std::string frac = (dot == std::string::npos) ? "" : sec_part.substr(dot + 1);
    auto secs = parse_int(whole);
    if (!secs) return std::nullopt;
    double fraction = 0.0;
    if (!frac.empty()) {
        auto ms = parse_int(frac);
        if (!ms) return std::nullopt;
        fraction = static_cast<double>(*ms) / std::pow(10.0, static_cast<double>(frac.size()));
    }

    double total = 0.0;
    if (parts.size() == 3) {
        auto hours = parse_int(parts[0]);
        auto minutes = parse_int(parts[1]);
        if (!hours || !minutes) return std::nullopt;
        total = *hours * 3600.0 + *minutes * 60.0;
    } else {
        auto minutes = parse_int(parts[0]);
        if (!minutes) return std::nullopt;
        total = *minutes * 60.0;
    }
    return total + static_cast<double>(*secs) + fraction;
}

std::string strip_markup(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_tag = false;
    for (char c : text) {
        if (c == '<') in_tag = true;
        else if (c == '>') in_tag = false;
        else if (!in_tag) out.push_back(c);
    }
    return out;
}

void add_warning(std::vector<std::string>* warnings, std::string message) {
    if (warnings) warnings->push_back(std::move(message));
}

} // namespace

SubtitleTrack parse_subtitles(std::string_view content,
                              std::optional<SubtitleFormat> format_hint,
                              std::vector<std::string>* warnings) {
    // UTF-8 BOM
    if (content.size() >= 3 && static_cast<unsigned char>(content[0]) == 0xEF &&
        static_cast<unsigned char>(content[1]) == 0xBB &&
        static_cast<unsigned char>(content[2]) == 0xBF)
        content.remove_prefix(3);

    SubtitleFormat format = format_hint.value_or(
        content.substr(0, 6) == "WEBVTT" ? SubtitleFormat::WebVTT : SubtitleFormat::SRT);

    std::vector<std::string> lines = split_lines(content);

    // group into blank-line separated blocks
    std::vector<std::vector<std::string>> blocks;
    std::vector<std::string> block;
    for (auto& line : lines) {
        if (trim(line).empty()) {
            if (!block.empty()) blocks.push_back(std::move(block));
            block.clear();
        } else {
            block.push_back(line);
        }
    }
    if (!block.empty()) blocks.push_back(std::move(block));

    SubtitleTrack track;
    track.source_format = format;

    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const auto& blk = blocks[b];
        std::string head = trim(blk.front());
        if (format == SubtitleFormat::WebVTT &&
            (head.rfind("WEBVTT", 0) == 0 || head.rfind("NOTE", 0) == 0 ||
             head.rfind("STYLE", 0) == 0 || head.rfind("REGION", 0) == 0))
            continue;

        std::size_t ts_line = blk.size();
        for (std::size_t i = 0; i < blk.size(); ++i) {
            if (blk[i].find("-->") != std::string::npos) {
                ts_line = i;
                break;
            }
        }
        if (ts_line == blk.size()) {
            add_warning(warnings, "block " + std::to_string(b + 1) + ": no timestamp line, skipped");
            continue;
        }

        const std::string& ts = blk[ts_line];
        std::size_t arrow = ts.find("-->");
        auto start = parse_cue_time(ts.substr(0, arrow));
        // first whitespace token after the arrow; trailing cue settings are discarded
        std::vector<std::string> rhs = split_whitespace(ts.substr(arrow + 3));
        auto end = rhs.empty() ? std::nullopt : parse_cue_time(rhs.front());
        if (!start || !end || *start < 0.0 || !(*start < *end)) {
            add_warning(warnings,
                        "block " + std::to_string(b + 1) + ": malformed timestamp line \"" + ts + "\", skipped");
            continue;
        }

        std::string text;
        for (std::size_t i = ts_line + 1; i < blk.size(); ++i) {
            std::string piece = trim(strip_markup(blk[i]));
            if (piece.empty()) continue;
            if (!text.empty()) text += ' ';
            text += piece;
        }
        track.cues.push_back(SubtitleCue{*start, *end, std::move(text)});
    }

    std::stable_sort(track.cues.begin(), track.cues.end(),
                     [](const SubtitleCue& a, const SubtitleCue& b) { return a.start < b.start; });

    if (track.cues.empty())
        throw Error(ErrorCode::EmptyTrack, "no cues parsed");
    return track;
}

SubtitleTrack parse_subtitle_file(const std::string& path,
                                  std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open subtitle file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();

    std::optional<SubtitleFormat> hint;
    if (path.size() >= 4) {
        std::string ext = to_lower(path.substr(path.size() - 4));
        if (ext == ".srt") hint = SubtitleFormat::SRT;
        else if (ext == ".vtt") hint = SubtitleFormat::WebVTT;
    }
    return parse_subtitles(content, hint, warnings);
}

std::optional<std::string> cue_at(const SubtitleTrack& track, double t,
                                  double lookback_seconds) {
    if (t < 0.0)
        throw Error(ErrorCode::NegativeTimestamp, "cue_at requires t >= 0");
    std::string joined;
    bool found = false;
    for (const auto& cue : track.cues) {
        // start-inclusive, end-exclusive
        if (cue.start <= t && t < cue.end + lookback_seconds) {
            if (found) joined += ' ';
            joined += cue.text;
            found = true;
        }
    }
    if (!found) return std::nullopt;
    return joined;
}

std::vector<std::optional<std::string>> align_track(const SubtitleTrack& track,
                                                    const Timeline& timeline,
                                                    double lookback_seconds) {
    std::vector<std::optional<std::string>> aligned;
    aligned.reserve(timeline.size());
    for (double t : timeline.timestamps)
        aligned.push_back(cue_at(track, t, lookback_seconds));
    return aligned;
}

namespace {

std::string srt_time(double t) {
    auto total_ms = static_cast<long long>(std::llround(t * 1000.0));
    long long ms = total_ms % 1000;
    long long s = (total_ms / 1000) % 60;
    long long m = (total_ms / 60000) % 60;
    long long h = total_ms / 3600000;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld,%03lld", h, m, s, ms);
    return buf;
}

} // namespace

std::string to_srt(const SubtitleTrack& track) {
    std::ostringstream out;
    for (std::size_t i = 0; i < track.cues.size(); ++i) {
        const auto& cue = track.cues[i];
        out << (i + 1) << '\n'
            << srt_time(cue.start) << " --> " << srt_time(cue.end) << '\n'
            << cue.text << '\n'
            << '\n';
    }
    return out.str();
}

} // namespace qgate
