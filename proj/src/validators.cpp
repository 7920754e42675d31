#include "docval/validators.hpp"

#include "docval/error.hpp"
#include "docval/metrics.hpp"

#include <algorithm>
#include <cstdlib>

namespace docval {

namespace {

constexpr double kAnswerTextWeight = 0.7;
constexpr double kAnswerOcrWeight  = 0.3;
constexpr double kBBoxIouWeight    = 0.8;
constexpr double kBBoxRegionWeight = 0.2;

Coord max_abs_diff(const BBox & a, const BBox & b) {
    return std::max({ std::abs(a.x1 - b.x1), std::abs(a.y1 - b.y1), std::abs(a.x2 - b.x2), std::abs(a.y2 - b.y2) });
}

}  // namespace

RegionAssignment ground_region(const BBox & b, std::span<const Region> regions) {
    RegionAssignment best;
    for (const auto & r : regions) {
        const double v = iou(b, r.bbox);
        if (v <= 0.0) {
            continue;
        }
        if (v > best.overlap_iou || (v == best.overlap_iou && best.region && r.index < *best.region)) {
            best.region      = r.index;
            best.overlap_iou = v;
        }
    }
    return best;
}

namespace {

RegionAssignment resolve_gt_region(const BBox & gt, std::span<const Region> regions, std::optional<int> annotated) {
    if (!annotated) {
        return ground_region(gt, regions);
    }
    RegionAssignment a;
    a.region = annotated;
    for (const auto & r : regions) {
        if (r.index == *annotated) {
            a.overlap_iou = iou(gt, r.bbox);
        }
    }
    return a;
}

}  // namespace

RegionAssignment ground_truth_region(const DocumentExample & ex) {
    return resolve_gt_region(ex.gt_bbox, ex.regions, ex.gt_region_index);
}

bool answer_in_ocr(std::string_view answer, std::span<const Region> regions) {
    const std::u32string needle = normalize_text(answer);
    if (needle.empty()) {
        return false;
    }
    return std::any_of(regions.begin(), regions.end(), [&](const Region & r) {
        return normalize_text(r.text).find(needle) != std::u32string::npos;
    });
}

AnswerScore score_answer(std::string_view answer, std::span<const std::string> gts, std::span<const Region> regions,
                         const ValidatorConfig & cfg) {
    AnswerScore s;
    s.anls          = anls(answer, gts, cfg.anls_threshold);
    s.answer_in_ocr = answer_in_ocr(answer, regions);
    s.q_ans         = kAnswerTextWeight * s.anls + kAnswerOcrWeight * (s.answer_in_ocr ? 1.0 : 0.0);
    return s;
}

BBoxScore score_bbox(const BBox & pred, const BBox & gt, std::span<const Region> regions, const ValidatorConfig &,
                     std::optional<int> annotated_gt_region) {
    BBoxScore s;
    s.iou         = iou(pred, gt);
    s.delta       = pixel_error(pred, gt);
    s.pred_region = ground_region(pred, regions);
    s.gt_region   = resolve_gt_region(gt, regions, annotated_gt_region);
    const bool same_region = s.pred_region.grounded() && s.gt_region.grounded() &&
                             *s.pred_region.region == *s.gt_region.region;
    s.q_bbox = kBBoxIouWeight * s.iou + kBBoxRegionWeight * (same_region ? 1.0 : 0.0);
    return s;
}

Band band_of(const BBox & b, const PageGeometry & page, Axis axis, const ValidatorConfig & cfg) {
    const double center = axis == Axis::kVertical ? static_cast<double>(b.y1 + b.y2) / (2.0 * static_cast<double>(page.height))
                                                  : static_cast<double>(b.x1 + b.x2) / (2.0 * static_cast<double>(page.width));
    if (center < cfg.spatial_band_edges[0]) {
        return Band::kFirst;
    }
    if (center < cfg.spatial_band_edges[1]) {
        return Band::kMiddle;
    }
    return Band::kLast;
}

ReasoningScore score_reasoning(const CoTTrace & trace, const PredictionTuple & declared, const PageGeometry & page,
                               const ValidatorConfig & cfg) {
    ReasoningScore s;

    s.structure.has_step   = !trace.steps.empty();
    s.structure.has_two    = trace.steps.size() >= 2;
    s.structure.has_answer = trace.final_answer.has_value();
    s.structure.has_bbox   = trace.final_bbox.has_value();
    const int present = int(s.structure.has_step) + int(s.structure.has_two) + int(s.structure.has_answer) +
                        int(s.structure.has_bbox);
    s.s_struct = static_cast<double>(present) / 4.0;

    if (trace.final_bbox) {
        Coord m = max_abs_diff(*trace.final_bbox, declared.bbox);
        if (auto mention = trace.last_coordinate_mention()) {
            m = std::max(m, max_abs_diff(*mention, declared.bbox));
        }
        s.coord_error = m;
        if (m <= cfg.coord_tolerance) {
            s.s_coord = 1.0;
        } else {
            s.s_coord = std::max(0.0, 1.0 - static_cast<double>(m - cfg.coord_tolerance) /
                                                static_cast<double>(cfg.coord_penalty_scale));
        }
    }

    size_t matched = 0;
    for (const auto & step : trace.steps) {
        for (const auto & phrase : step.spatial_phrases) {
            ++s.phrase_count;
            const Band actual = band_of(declared.bbox, page, phrase.axis, cfg);
            if (actual == phrase.band) {
                ++matched;
            } else {
                s.mismatches.push_back({ phrase, actual });
            }
        }
    }
    s.s_spatial = s.phrase_count == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(s.phrase_count);

    s.q_reason = (s.s_struct + s.s_coord + s.s_spatial) / 3.0;
    return s;
}

double overall_quality(double q_ans, double q_bbox, double q_reason, const ValidatorConfig & cfg) {
    for (double v : { q_ans, q_bbox, q_reason }) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error(ErrorCode::kOutOfRange, "component score outside [0,1]: " + std::to_string(v));
        }
    }
    return cfg.alpha_ans * q_ans + cfg.alpha_bbox * q_bbox + cfg.alpha_reason * q_reason;
}

QualityBreakdown validate(const DocumentExample & example, const PredictionTuple & prediction,
                          const ValidatorConfig & cfg) {
    if (example.id != prediction.id) {
        throw Error(ErrorCode::kIdMismatch,
                    "IdMismatch: prediction '" + prediction.id + "' validated against example '" + example.id + "'");
    }

    const AnswerScore    ans    = score_answer(prediction.answer, example.answers, example.regions, cfg);
    const BBoxScore      box    = score_bbox(prediction.bbox, example.gt_bbox, example.regions, cfg, example.gt_region_index);
    const ReasoningScore reason = score_reasoning(parse_trace(prediction.cot), prediction, example.page, cfg);

    QualityBreakdown b;
    b.q_ans         = ans.q_ans;
    b.anls          = ans.anls;
    b.answer_in_ocr = ans.answer_in_ocr;
    b.q_bbox        = box.q_bbox;
    b.iou           = box.iou;
    b.delta         = box.delta;
    b.pred_region   = box.pred_region;
    b.gt_region     = box.gt_region;
    b.q_reason      = reason.q_reason;
    b.s_struct      = reason.s_struct;
    b.s_coord       = reason.s_coord;
    b.s_spatial     = reason.s_spatial;
    b.q             = overall_quality(b.q_ans, b.q_bbox, b.q_reason, cfg);
    return b;
}

}  // namespace docval
