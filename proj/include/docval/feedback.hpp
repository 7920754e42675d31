#pragma once

#include "docval/config.hpp"
#include "docval/records.hpp"
#include "docval/types.hpp"

#include <string>
#include <vector>

namespace docval {

enum class VerdictStatus { kAccept, kReject };

struct Verdict {
    VerdictStatus status    = VerdictStatus::kReject;
    double        q         = 0.0;
    double        threshold = 0.0;
};

// Filter mode: accept iff q > q_min (strict).
Verdict decide(const QualityBreakdown & breakdown, const ValidatorConfig & cfg);

// "Move 250px LEFT, 150px DOWN." from the top-left corner offsets; zero
// components are omitted, both zero gives "Position correct."
std::string render_bbox_directive(const PixelDelta & delta);

// "[760,650,840,680]" as used in feedback messages.
std::string format_feedback_bbox(const BBox & b);

enum class ErrorCategory { kAnswer, kBBox, kReasoning };

struct ErrorItem {
    ErrorCategory category = ErrorCategory::kAnswer;
    std::string   message;
    double        severity = 0.0;  // 1 - component score
};

// Fix priority, lowest value first.
enum class FixKind {
    kAnswerField = 1,
    kRegion      = 2,
    kGeometry    = 3,
    kReasoning   = 4,
};

struct Fix {
    FixKind     kind = FixKind::kReasoning;
    std::string text;
};

struct FeedbackReport {
    std::string            id;
    bool                   valid     = false;
    double                 threshold = 0.0;
    QualityBreakdown       breakdown;
    std::vector<ErrorItem> errors;
    std::vector<Fix>       fixes;
    std::string            suggested_answer;
    BBox                   suggested_bbox;
    std::string            suggested_cot;  // canonical trace echoing the ground truth
    std::string            correction_directive;

    // Only the fix texts, in priority order.
    std::vector<std::string> fix_texts() const;
};

// A component counts as failing below 1 - kFailTolerance.
inline constexpr double kFailTolerance = 1e-9;

// Verifier mode. breakdown must come from validate(example, prediction, cfg).
FeedbackReport build_report(const DocumentExample & example, const PredictionTuple & prediction,
                            const QualityBreakdown & breakdown, const ValidatorConfig & cfg);

// The feedback JSONL record for one report.
ordered_json report_to_json(const FeedbackReport & report);
std::string  report_to_line(const FeedbackReport & report);

std::string_view category_name(ErrorCategory c);

}  // namespace docval
