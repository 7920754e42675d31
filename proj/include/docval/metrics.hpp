#pragma once

#include "docval/types.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>

namespace docval {

// ---------------------------------------------------------------------------
// Text
// ---------------------------------------------------------------------------

// Decodes UTF-8 into Unicode scalar values. Malformed sequences decode to
// U+FFFD one byte at a time.
std::u32string decode_utf8(std::string_view s);
std::string    encode_utf8(std::u32string_view s);

// Lowercases, trims both ends and collapses internal whitespace runs to a
// single U+0020. Case folding covers ASCII, Latin-1, Latin Extended-A, Greek
// and Cyrillic; it is locale-independent.
std::u32string normalize_text(std::string_view s);

// Unit-cost Levenshtein distance over scalar values.
size_t edit_distance(std::u32string_view a, std::u32string_view b);

// 1 - d/max(|a'|,|b'|) over normalized inputs, zeroed below tau. Two empty
// inputs score 1.
double normalized_levenshtein(std::string_view a, std::string_view b, double tau);

// Best normalized_levenshtein over the ground-truth variants. Throws
// kEmptyGroundTruth when gts is empty.
double anls(std::string_view pred, std::span<const std::string> gts, double tau);

// ---------------------------------------------------------------------------
// Boxes
// ---------------------------------------------------------------------------

Coord intersection_area(const BBox & a, const BBox & b);

// Intersection over union; 0 whenever the union has zero area.
double iou(const BBox & a, const BBox & b);

// gt - pred componentwise. Positive dx: ground truth lies right; positive dy:
// ground truth lies below.
PixelDelta pixel_error(const BBox & pred, const BBox & gt);

// ---------------------------------------------------------------------------
// Corpus aggregates
// ---------------------------------------------------------------------------

struct MatchedPair {
    double iou  = 0.0;
    double anls = 0.0;
};

inline constexpr size_t kIouThresholdCount = 10;

// 0.50, 0.55, ..., 0.95
std::array<double, kIouThresholdCount> iou_thresholds();

struct LocalizationSummary {
    double                                 map = 0.0;
    double                                 iou_at_50 = 0.0;
    double                                 iou_at_75 = 0.0;
    std::array<double, kIouThresholdCount> per_threshold{};
};

// One prediction per question, so AP at threshold t is the fraction of
// predictions with IoU >= t. Throws kEmptyInput.
LocalizationSummary map_over_iou(std::span<const MatchedPair> pairs);

// Mean per-example ANLS. Throws kEmptyInput.
double dataset_anls(std::span<const MatchedPair> pairs);

}  // namespace docval
