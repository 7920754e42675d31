#include "docval/feedback.hpp"

#include "docval/cot_parser.hpp"
#include "docval/validators.hpp"

#include <cstdio>
#include <cstdlib>

namespace docval {

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

bool failing(double score) {
    return score < 1.0 - kFailTolerance;
}

std::string one_line(std::string_view s) {
    std::string out(s);
    for (char & c : out) {
        if (c == '\n' || c == '\r') {
            c = ' ';
        }
    }
    return out;
}

std::string in_quotes(std::string_view s) {
    return "\"" + one_line(s) + "\"";
}

std::string region_label(const DocumentExample & ex, int index) {
    const Region * r    = ex.find_region(index);
    std::string    text = (r && !r->text.empty()) ? one_line(r->text) : std::string("no text");
    return "Region #" + std::to_string(index) + " (" + text + ")";
}

std::string region_text(const DocumentExample & ex, int index) {
    const Region * r = ex.find_region(index);
    return r ? one_line(r->text) : std::string();
}

std::string location_words(const BBox & b, const PageGeometry & page, const ValidatorConfig & cfg) {
    return std::string(band_word(Axis::kVertical, band_of(b, page, Axis::kVertical, cfg))) + " " +
           std::string(band_word(Axis::kHorizontal, band_of(b, page, Axis::kHorizontal, cfg)));
}

std::string answer_message(const DocumentExample & ex, const PredictionTuple & pred, const QualityBreakdown & b) {
    std::string msg = "Got " + in_quotes(pred.answer) + ", expected " + in_quotes(ex.answers.front()) +
                      " (ANLS=" + fixed3(b.anls) + ").";
    if (b.pred_region.grounded() && b.gt_region.grounded() && *b.pred_region.region != *b.gt_region.region &&
        failing(b.anls)) {
        msg += " Your box reads " + in_quotes(region_text(ex, *b.pred_region.region)) + " (Region #" +
               std::to_string(*b.pred_region.region) + ") but the answer field is " +
               in_quotes(region_text(ex, *b.gt_region.region)) + " (Region #" + std::to_string(*b.gt_region.region) +
               "). Wrong semantic field.";
    }
    if (!b.answer_in_ocr) {
        msg += " The answer does not appear in any detected text region.";
    }
    return msg;
}

std::string bbox_message(const DocumentExample & ex, const PredictionTuple & pred, const QualityBreakdown & b) {
    const std::string box       = format_feedback_bbox(pred.bbox);
    const std::string gt_box    = format_feedback_bbox(ex.gt_bbox);
    const std::string directive = render_bbox_directive(b.delta);
    const auto &      rp        = b.pred_region;
    const auto &      rg        = b.gt_region;

    std::string msg = "Your bbox " + box;
    if (rp.grounded() && rg.grounded()) {
        if (*rp.region != *rg.region) {
            msg += " targets " + region_label(ex, *rp.region) + " but should target " + region_label(ex, *rg.region) +
                   " at " + gt_box + ".";
        } else {
            msg += " targets the correct " + region_label(ex, *rg.region) + " but overlaps " + gt_box +
                   " with IoU=" + fixed3(b.iou) + ".";
        }
    } else if (rg.grounded()) {
        msg += " targets empty space but should target " + region_label(ex, *rg.region) + " at " + gt_box + ".";
    } else if (rp.grounded()) {
        msg += " targets " + region_label(ex, *rp.region) + " but the answer lies outside detected text at " +
               gt_box + ".";
    } else {
        msg += " targets empty space; expected " + gt_box + " (IoU=" + fixed3(b.iou) + ").";
    }
    return msg + " " + directive;
}

std::string reasoning_message(const ReasoningScore & r) {
    std::vector<std::string> issues;
    if (!r.structure.has_step) {
        issues.emplace_back("no reasoning steps");
    } else if (!r.structure.has_two) {
        issues.emplace_back("only one reasoning step");
    }
    if (!r.structure.has_answer) {
        issues.emplace_back("missing Answer line");
    }
    if (!r.structure.has_bbox) {
        issues.emplace_back("missing BBox line");
    }
    if (r.coord_error && failing(r.s_coord)) {
        issues.push_back("cited coordinates deviate from the declared bbox by up to " + std::to_string(*r.coord_error) +
                         "px");
    }
    for (const auto & m : r.mismatches) {
        issues.push_back(in_quotes(m.phrase.source_text) + " describes a box in the " +
                         std::string(band_word(m.phrase.axis, m.actual)) + " band");
    }
    std::string msg = "Reasoning issues: ";
    for (size_t i = 0; i < issues.size(); ++i) {
        msg += (i ? "; " : "") + issues[i];
    }
    return msg + ".";
}

std::string suggested_trace(const DocumentExample & ex, const QualityBreakdown & b, const ValidatorConfig & cfg) {
    CoTTrace t;
    t.steps.push_back({ 1, "Identify the field the question asks for.", {}, {} });
    t.steps.push_back({ 2, "The answer lies in the " + location_words(ex.gt_bbox, ex.page, cfg) + " part of the page.", {}, {} });
    if (b.gt_region.grounded()) {
        t.steps.push_back({ 3,
                            "The answer text sits in Region #" + std::to_string(*b.gt_region.region) + " at " +
                                format_trace_bbox(ex.gt_bbox) + ".",
                            {},
                            {} });
    } else {
        t.steps.push_back({ 3, "The answer box is " + format_trace_bbox(ex.gt_bbox) + ".", {}, {} });
    }
    t.final_answer = one_line(ex.answers.front());
    t.final_bbox   = ex.gt_bbox;
    return serialize_trace(t);
}

}  // namespace

Verdict decide(const QualityBreakdown & breakdown, const ValidatorConfig & cfg) {
    return { breakdown.q > cfg.q_min ? VerdictStatus::kAccept : VerdictStatus::kReject, breakdown.q, cfg.q_min };
}

std::string render_bbox_directive(const PixelDelta & delta) {
    const Coord dx = delta[0];
    const Coord dy = delta[1];
    if (dx == 0 && dy == 0) {
        return "Position correct.";
    }
    std::string out = "Move ";
    if (dx != 0) {
        out += std::to_string(std::abs(dx)) + "px " + (dx < 0 ? "LEFT" : "RIGHT");
    }
    if (dy != 0) {
        if (dx != 0) {
            out += ", ";
        }
        out += std::to_string(std::abs(dy)) + "px " + (dy < 0 ? "UP" : "DOWN");
    }
    return out + ".";
}

std::string format_feedback_bbox(const BBox & b) {
    return "[" + std::to_string(b.x1) + "," + std::to_string(b.y1) + "," + std::to_string(b.x2) + "," +
           std::to_string(b.y2) + "]";
}

std::vector<std::string> FeedbackReport::fix_texts() const {
    std::vector<std::string> out;
    out.reserve(fixes.size());
    for (const auto & f : fixes) {
        out.push_back(f.text);
    }
    return out;
}

FeedbackReport build_report(const DocumentExample & example, const PredictionTuple & prediction,
                            const QualityBreakdown & breakdown, const ValidatorConfig & cfg) {
    FeedbackReport report;
    report.id                   = prediction.id;
    report.threshold            = cfg.q_min;
    report.valid                = decide(breakdown, cfg).status == VerdictStatus::kAccept;
    report.breakdown            = breakdown;
    report.suggested_answer     = example.answers.front();
    report.suggested_bbox       = example.gt_bbox;
    report.correction_directive = render_bbox_directive(breakdown.delta);
    report.suggested_cot        = suggested_trace(example, breakdown, cfg);

    const auto & rp            = breakdown.pred_region;
    const auto & rg            = breakdown.gt_region;
    const bool   region_differs = rp.region != rg.region;

    if (failing(breakdown.q_ans)) {
        report.errors.push_back({ ErrorCategory::kAnswer, answer_message(example, prediction, breakdown),
                                  1.0 - breakdown.q_ans });
    }
    if (failing(breakdown.q_bbox)) {
        report.errors.push_back({ ErrorCategory::kBBox, bbox_message(example, prediction, breakdown),
                                  1.0 - breakdown.q_bbox });
    }

    const ReasoningScore reasoning = score_reasoning(parse_trace(prediction.cot), prediction, example.page, cfg);
    if (failing(breakdown.q_reason)) {
        report.errors.push_back({ ErrorCategory::kReasoning, reasoning_message(reasoning), 1.0 - breakdown.q_reason });
    }

    // (1) answer field / text
    if (failing(breakdown.anls)) {
        if (region_differs && rp.grounded() && rg.grounded()) {
            report.fixes.push_back({ FixKind::kAnswerField,
                                     "Distinguish " + in_quotes(region_text(example, *rp.region)) + " vs " +
                                         in_quotes(region_text(example, *rg.region)) + " fields; answer from Region #" +
                                         std::to_string(*rg.region) + "." });
        } else if (region_differs && rg.grounded()) {
            report.fixes.push_back({ FixKind::kAnswerField, "Answer from the text in Region #" +
                                                                std::to_string(*rg.region) + " (" +
                                                                in_quotes(region_text(example, *rg.region)) +
                                                                "), not from empty space." });
        } else if (region_differs) {
            report.fixes.push_back({ FixKind::kAnswerField, "Do not answer from Region #" + std::to_string(*rp.region) +
                                                                "; the expected answer is " +
                                                                in_quotes(example.answers.front()) + "." });
        } else {
            report.fixes.push_back(
                { FixKind::kAnswerField, "Transcribe the answer exactly as " + in_quotes(example.answers.front()) + "." });
        }
    }
    // (2) region / label localisation
    if (region_differs && rg.grounded()) {
        report.fixes.push_back({ FixKind::kRegion, "Locate " + in_quotes(region_text(example, *rg.region)) + " (Region #" +
                                                       std::to_string(*rg.region) + ") in the " +
                                                       location_words(example.gt_bbox, example.page, cfg) +
                                                       " section." });
    }
    // (3) geometry
    if (failing(breakdown.iou)) {
        report.fixes.push_back({ FixKind::kGeometry, "Adjust bbox to " + format_feedback_bbox(example.gt_bbox) + ": " +
                                                         report.correction_directive });
    }
    // (4) reasoning repairs
    if (failing(breakdown.q_reason)) {
        if (!reasoning.structure.has_two) {
            report.fixes.push_back({ FixKind::kReasoning, "Write at least two numbered reasoning steps (\"Step N: ...\")." });
        }
        if (!reasoning.structure.has_answer) {
            report.fixes.push_back({ FixKind::kReasoning, "End the trace with an \"Answer: ...\" line." });
        }
        if (!reasoning.structure.has_bbox) {
            report.fixes.push_back(
                { FixKind::kReasoning, "End the trace with a \"BBox: [x1, y1, x2, y2]\" line matching the declared box." });
        }
        if (reasoning.coord_error && failing(breakdown.s_coord)) {
            report.fixes.push_back({ FixKind::kReasoning, "Make the cited coordinates match the declared bbox " +
                                                              format_feedback_bbox(prediction.bbox) + "." });
        }
        if (!reasoning.mismatches.empty()) {
            report.fixes.push_back({ FixKind::kReasoning, "Describe the answer location as \"" +
                                                              location_words(example.gt_bbox, example.page, cfg) +
                                                              "\"." });
        }
    }
    return report;
}

std::string_view category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::kAnswer:    return "answer";
        case ErrorCategory::kBBox:      return "bbox";
        case ErrorCategory::kReasoning: return "reasoning";
    }
    return "";
}

ordered_json report_to_json(const FeedbackReport & report) {
    const auto & b = report.breakdown;
    ordered_json j;
    j["id"]         = report.id;
    j["status"]     = report.valid ? "valid" : "invalid";
    j["q"]          = b.q;
    j["components"] = {
        { "q_ans", b.q_ans },       { "q_bbox", b.q_bbox },   { "q_reason", b.q_reason },
        { "s_struct", b.s_struct }, { "s_coord", b.s_coord }, { "s_spatial", b.s_spatial },
    };
    j["delta"] = ordered_json::array({ b.delta[0], b.delta[1], b.delta[2], b.delta[3] });

    ordered_json errors = ordered_json::array();
    for (const auto & e : report.errors) {
        errors.push_back({ { "category", category_name(e.category) }, { "message", e.message }, { "severity", e.severity } });
    }
    j["errors"] = std::move(errors);
    j["fixes"]  = report.fix_texts();
    j["suggested"] = {
        { "answer", report.suggested_answer },
        { "bbox", bbox_to_json(report.suggested_bbox) },
        { "cot", report.suggested_cot },
    };
    return j;
}

std::string report_to_line(const FeedbackReport & report) {
    return report_to_json(report).dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

}  // namespace docval
