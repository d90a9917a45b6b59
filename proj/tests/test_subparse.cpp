#include <doctest.h>

#include "qgate/ingest.hpp"
#include "qgate/subparse.hpp"

using namespace qgate;

namespace {
const std::string kFixtureDir = QGATE_FIXTURE_DIR;
}

TEST_CASE("SRT cue block converts to fractional seconds") {
    SubtitleTrack track = parse_subtitles("1\n00:00:01,000 --> 00:00:03,500\nHello world\n");
    REQUIRE(track.cues.size() == 1);
    CHECK(track.cues[0] == SubtitleCue{1.0, 3.5, "Hello world"});
    CHECK(track.source_format == SubtitleFormat::SRT);
}

TEST_CASE("WebVTT auto-detects, strips tags, accepts MM:SS form") {
    SubtitleTrack track = parse_subtitles("WEBVTT\n\n00:10.000 --> 00:12.250\n<i>music</i>\n");
    REQUIRE(track.cues.size() == 1);
    CHECK(track.cues[0] == SubtitleCue{10.0, 12.25, "music"});
    CHECK(track.source_format == SubtitleFormat::WebVTT);
}

TEST_CASE("multi-line cue text collapses to single spaces") {
    SubtitleTrack track = parse_subtitles("1\n00:00:01,000 --> 00:00:02,000\nLine A\nLine B\n");
    REQUIRE(track.cues.size() == 1);
    CHECK(track.cues[0].text == "Line A Line B");
}

TEST_CASE("malformed cue blocks are skipped with warnings, not fatal") {
    std::vector<std::string> warnings;
    std::string content =
        "1\n00:00:01,000 --> 00:00:02,000\nGood\n\n"
        "2\nnot a timestamp\nBad\n\n"
        "3\n00:00:05,000 --> 00:00:04,000\nBackwards\n\n"
        "4\n00:00:06,000 --> 00:00:07,000\nAlso good\n";
    SubtitleTrack track = parse_subtitles(content, {}, &warnings);
    CHECK(track.cues.size() == 2);
    CHECK(warnings.size() == 2);
}

TEST_CASE("zero parsed cues is the EmptyTrack error") {
    try {
        parse_subtitles("garbage\nmore garbage\n");
        FAIL("expected EmptyTrack");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyTrack);
    }
}

TEST_CASE("cue_at covers start-inclusive, end-exclusive intervals") {
    SubtitleTrack track;
    track.cues.push_back({1.0, 3.5, "Hello"});

    CHECK(cue_at(track, 2.0) == "Hello");
    CHECK(cue_at(track, 1.0) == "Hello");
    CHECK(!cue_at(track, 5.0).has_value());
    CHECK(!cue_at(track, 3.5).has_value());

    SubtitleTrack boundary;
    boundary.cues.push_back({1.0, 3.0, "x"});
    CHECK(!cue_at(boundary, 3.0).has_value());
}

TEST_CASE("overlapping cues concatenate in start order") {
    SubtitleTrack track;
    track.cues.push_back({1.0, 4.0, "A"});
    track.cues.push_back({3.0, 6.0, "B"});
    CHECK(cue_at(track, 3.5) == "A B");
    CHECK(cue_at(track, 2.0) == "A");
    CHECK(cue_at(track, 5.0) == "B");
}

TEST_CASE("align_track maps each frame through cue_at") {
    Timeline timeline = build_timeline(2.0, 1.0); // [0,1,2]
    SubtitleTrack track;
    track.cues.push_back({0.5, 1.5, "x"});
    auto aligned = align_track(track, timeline);
    REQUIRE(aligned.size() == 3);
    CHECK(!aligned[0].has_value());
    CHECK(aligned[1] == "x");
    CHECK(!aligned[2].has_value());

    SubtitleTrack empty;
    auto blank = align_track(empty, timeline);
    CHECK(blank.size() == timeline.size());
    for (const auto& s : blank) CHECK(!s.has_value());

    Timeline wide = build_timeline(4.0, 0.5); // [0,2,4]
    SubtitleTrack cover;
    cover.cues.push_back({0.0, 5.0, "a"});
    auto full = align_track(cover, wide);
    for (const auto& s : full) CHECK(s == "a");
}

TEST_CASE("lookback extends cue coverage past the cue end") {
    SubtitleTrack track;
    track.cues.push_back({1.0, 3.0, "spoken"});
    CHECK(!cue_at(track, 3.5).has_value());
    CHECK(cue_at(track, 3.5, 1.0) == "spoken");
    CHECK(!cue_at(track, 4.5, 1.0).has_value());

    Timeline timeline = build_timeline(4.0, 1.0);
    auto aligned = align_track(track, timeline, 1.0);
    CHECK(aligned[3] == "spoken"); // silence gap right after the cue
    CHECK(!aligned[0].has_value());
}

TEST_CASE("align_track length always equals the timeline length") {
    SubtitleTrack track;
    track.cues.push_back({0.2, 1.7, "one"});
    track.cues.push_back({2.0, 9.0, "two"});
    for (double duration : {1.0, 3.0, 7.5, 20.0}) {
        Timeline timeline = build_timeline(duration, 2.0);
        CHECK(align_track(track, timeline).size() == timeline.size());
    }
}

TEST_CASE("conformance fixtures parse exactly (BOM, CRLF, overlaps, markup)") {
    std::vector<std::string> warnings;
    SubtitleTrack srt = parse_subtitle_file(kFixtureDir + "/conformance.srt", &warnings);
    CHECK(warnings.empty());
    REQUIRE(srt.cues.size() == 12);
    CHECK(srt.cues[0] == SubtitleCue{1.0, 2.5, "Opening line"});
    CHECK(srt.cues[4].text == "Emphasis stripped");

    SubtitleTrack vtt = parse_subtitle_file(kFixtureDir + "/conformance.vtt", &warnings);
    CHECK(warnings.empty());
    REQUIRE(vtt.cues.size() == 12);
}

TEST_CASE("canonical SRT serialization round-trips") {
    SubtitleTrack parsed = parse_subtitle_file(kFixtureDir + "/conformance.srt");
    SubtitleTrack reparsed = parse_subtitles(to_srt(parsed), SubtitleFormat::SRT);
    CHECK(parsed.cues == reparsed.cues);

    // and WebVTT content survives a trip through the canonical SRT form
    SubtitleTrack vtt = parse_subtitle_file(kFixtureDir + "/conformance.vtt");
    SubtitleTrack vtt_again = parse_subtitles(to_srt(vtt), SubtitleFormat::SRT);
    CHECK(vtt.cues == vtt_again.cues);
}
