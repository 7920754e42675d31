#pragma once

#include "docval/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace docval {

// Canonical trace format:
//
//   Step 1: <text>
//   Step 2: <text>
//   ...
//   Answer: <final answer>
//   BBox: [x1, y1, x2, y2]
//
// Keywords are case-insensitive and may be indented. Lines that match none of
// the three forms continue the current step (or the preamble before the first
// step). "Answer: <a>, BBox: [..]" on a single line is also accepted.

enum class Axis { kVertical, kHorizontal };

// first/middle/last = upper/middle/lower (vertical) or left/center/right
// (horizontal).
enum class Band { kFirst, kMiddle, kLast };

struct SpatialPhrase {
    Axis        axis = Axis::kVertical;
    Band        band = Band::kMiddle;
    std::string source_text;

    friend bool operator==(const SpatialPhrase &, const SpatialPhrase &) = default;
};

struct ReasoningStep {
    int                        ordinal = 0;
    std::string                text;
    std::vector<BBox>          coordinates;
    std::vector<SpatialPhrase> spatial_phrases;
};

struct CoTTrace {
    std::string                preamble;
    std::vector<ReasoningStep> steps;
    std::optional<std::string> final_answer;
    std::optional<BBox>        final_bbox;
    std::string                raw;

    // Last coordinate mention across all steps, in source order.
    std::optional<BBox> last_coordinate_mention() const;
};

// Total: never fails; missing elements are left absent.
CoTTrace parse_trace(std::string_view raw);

std::vector<SpatialPhrase> extract_spatial_phrases(std::string_view step_text);

// Every well-formed "[int, int, int, int]" group that is also a valid box.
std::vector<BBox> extract_coordinates(std::string_view text);

// "[x1, y1, x2, y2]" as used inside traces.
std::string format_trace_bbox(const BBox & b);

// Renders a trace in the canonical format; parse_trace(serialize_trace(t))
// reproduces steps, final answer and final bbox for single-line step texts.
std::string serialize_trace(const CoTTrace & trace);

std::string_view band_word(Axis axis, Band band);

}  // namespace docval
