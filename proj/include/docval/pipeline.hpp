#pragma once

#include "docval/config.hpp"
#include "docval/feedback.hpp"
#include "docval/records.hpp"
#include "docval/types.hpp"

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace docval {

// ---------------------------------------------------------------------------
// Filter mode
// ---------------------------------------------------------------------------

struct RejectionReasons {
    size_t answer    = 0;
    size_t bbox      = 0;
    size_t reasoning = 0;
};

struct FilterStats {
    size_t           total    = 0;
    size_t           accepted = 0;
    size_t           rejected = 0;
    RejectionReasons reasons;

    double retention() const { return total == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(total); }
};

ordered_json stats_to_json(const FilterStats & stats);

// The lowest-scoring component; ties resolve answer, then bbox, then reasoning.
ErrorCategory rejection_reason(const QualityBreakdown & b);

struct StreamOptions {
    int         jobs             = 0;     // <= 0: all cores
    size_t      chunk_size       = 1024;  // records in flight per batch
    std::string examples_name    = "<examples>";
    std::string predictions_name = "<predictions>";
};

// The accepted-record line: the example record with the validated prediction
// under "prediction". It still parses as an example record.
std::string accepted_record_line(const DocumentExample & ex, const PredictionTuple & pred);

// Reads the two JSONL streams in lockstep (line i of predictions must carry
// the id of line i of examples), validates each chunk in parallel and writes
// accepted records in input order. Memory is bounded by the chunk size plus
// the set of ids seen so far. Throws kOrphanPrediction, kMissingPrediction,
// kDuplicateId, or a record validation error with file:line context.
FilterStats filter_stream(std::istream & examples, std::istream & predictions, std::ostream * accepted,
                          const ValidatorConfig & cfg, const StreamOptions & opts = {});

// ---------------------------------------------------------------------------
// Verifier mode
// ---------------------------------------------------------------------------

struct BatchMetrics {
    size_t count     = 0;
    double map       = 0.0;  // 0..1
    double iou_at_50 = 0.0;
    double iou_at_75 = 0.0;
    double anls      = 0.0;
    double mean_q    = 0.0;
};

ordered_json metrics_to_json(const BatchMetrics & m);

struct VerifyResult {
    std::vector<FeedbackReport> reports;  // prediction order
    BatchMetrics                metrics;
};

// Predictions are matched to examples by id. Throws kOrphanPrediction for a
// prediction without example, kDuplicateId for a repeated id on either side,
// kEmptyInput for an empty prediction list.
VerifyResult verify_batch(std::span<const DocumentExample> examples, std::span<const PredictionTuple> predictions,
                          const ValidatorConfig & cfg, int jobs = 0);

BatchMetrics aggregate_metrics(std::span<const FeedbackReport> reports);

// ---------------------------------------------------------------------------
// Convergence
// ---------------------------------------------------------------------------

struct ConvergenceResult {
    bool                  converged = false;
    std::optional<double> mean_delta;  // absent until `window` deltas exist
    std::optional<double> max_delta;
};

// Over the last `window` consecutive deltas of the mAP history (0..100
// scale): converged iff mean < eps_mean and max < eps_max, both strict.
ConvergenceResult convergence_check(std::span<const double> history, const ConvergenceConfig & cfg);

// ---------------------------------------------------------------------------
// Refinement loop
// ---------------------------------------------------------------------------

// What the student may see of an example: no regions, no ground truth.
struct StudentQuery {
    std::string  id;
    PageGeometry page;
    std::string  question;
};

StudentQuery make_query(const DocumentExample & ex);

class StudentAdapter {
  public:
    virtual ~StudentAdapter() = default;

    // Deterministic for a given adapter state.
    virtual PredictionTuple predict(const StudentQuery & query) const = 0;

    // Absorbs one iteration of verifier feedback.
    virtual void update(std::span<const FeedbackReport> reports) = 0;
};

struct IterationRecord {
    int    k         = 0;
    double map       = 0.0;  // 0..100
    double mean_anls = 0.0;
    double mean_q    = 0.0;
};

struct RefinementHistory {
    std::vector<IterationRecord> iterations;
    std::optional<int>           converged_at;

    std::vector<double> map_series() const;
    double              final_map() const { return iterations.empty() ? 0.0 : iterations.back().map; }
};

ordered_json history_to_json(const RefinementHistory & h);

// Thrown when the adapter fails mid-loop; carries the iterations completed.
class RefinementAborted : public std::runtime_error {
  public:
    RefinementAborted(const std::string & what, RefinementHistory partial)
        : std::runtime_error(what), history_(std::move(partial)) {}

    const RefinementHistory & history() const { return history_; }

  private:
    RefinementHistory history_;
};

// Per iteration k = 1..max_iterations: predict the refine set from queries,
// verify against the full examples and record mAP; stop once
// convergence_check fires, otherwise hand the reports to the adapter.
RefinementHistory run_refinement_loop(StudentAdapter & student, std::span<const DocumentExample> refine_set,
                                      const ValidatorConfig & cfg, int jobs = 0);

}  // namespace docval
