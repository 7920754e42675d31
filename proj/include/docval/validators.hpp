#pragma once

#include "docval/config.hpp"
#include "docval/cot_parser.hpp"
#include "docval/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace docval {

// Module 1: argmax IoU over the regions, ties to the lowest region index.
// A zero best IoU (or no regions) is ungrounded.
RegionAssignment ground_region(const BBox & b, std::span<const Region> regions);

// Ground-truth region: the annotated index when present, else derived by
// grounding the ground-truth box.
RegionAssignment ground_truth_region(const DocumentExample & ex);

// Normalized substring containment in a single region's text. An answer that
// normalizes to nothing never counts as present.
bool answer_in_ocr(std::string_view answer, std::span<const Region> regions);

struct AnswerScore {
    double q_ans         = 0.0;
    double anls          = 0.0;
    bool   answer_in_ocr = false;
};

// Module 2: q_ans = 0.7 * ANLS + 0.3 * [answer in OCR]. Throws
// kEmptyGroundTruth.
AnswerScore score_answer(std::string_view answer, std::span<const std::string> gts, std::span<const Region> regions,
                         const ValidatorConfig & cfg);

struct BBoxScore {
    double           q_bbox = 0.0;
    double           iou    = 0.0;
    PixelDelta       delta{};
    RegionAssignment pred_region;
    RegionAssignment gt_region;
};

// Module 3: q_bbox = 0.8 * IoU + 0.2 * [r_p == r_gt, both grounded].
BBoxScore score_bbox(const BBox & pred, const BBox & gt, std::span<const Region> regions, const ValidatorConfig & cfg,
                     std::optional<int> annotated_gt_region = std::nullopt);

// Which of the four structural elements a trace has.
struct StructureCheck {
    bool has_step   = false;
    bool has_two    = false;
    bool has_answer = false;
    bool has_bbox   = false;
};

struct SpatialMismatch {
    SpatialPhrase phrase;
    Band          actual = Band::kMiddle;
};

struct ReasoningScore {
    double q_reason  = 0.0;
    double s_struct  = 0.0;
    double s_coord   = 0.0;
    double s_spatial = 0.0;

    StructureCheck               structure;
    std::optional<Coord>         coord_error;  // absent when there is no final bbox
    size_t                       phrase_count = 0;
    std::vector<SpatialMismatch> mismatches;
};

// Band of a box's center along one axis, using the configured edges.
Band band_of(const BBox & b, const PageGeometry & page, Axis axis, const ValidatorConfig & cfg);

// Module 4: mean of structural completeness, coordinate consistency and
// spatial consistency.
ReasoningScore score_reasoning(const CoTTrace & trace, const PredictionTuple & declared, const PageGeometry & page,
                               const ValidatorConfig & cfg);

// Weighted sum with the configured module weights. Throws kOutOfRange when an
// input lies outside [0,1].
double overall_quality(double q_ans, double q_bbox, double q_reason, const ValidatorConfig & cfg);

// All modules composed. Throws kIdMismatch when the ids differ.
QualityBreakdown validate(const DocumentExample & example, const PredictionTuple & prediction,
                          const ValidatorConfig & cfg);

}  // namespace docval
